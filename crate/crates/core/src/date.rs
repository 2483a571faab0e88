//! Publication dates with explicit precision.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid date {0:?}")]
pub struct InvalidDate(pub String);

impl InvalidDate {
    pub fn name(&self) -> &'static str {
        "InvalidDate"
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    Year,
    Month,
    Day,
}

pub fn is_leap_year(year: i32) -> bool {
    (year % 4 == 0 && year % 100 != 0) || year % 400 == 0
}

pub fn days_in_month(year: i32, month: u8) -> u8 {
    match month {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        2 if is_leap_year(year) => 29,
        2 => 28,
        _ => panic!("month out of range: {month}"),
    }
}

/// A calendar date known to year, month or day precision.
///
/// Field order gives the derived ordering: dates compare component-wise,
/// and a coarser date sorts before any finer date sharing its prefix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct PartialDate {
    year: u16,
    month: Option<u8>,
    day: Option<u8>,
}

impl PartialDate {
    pub fn year_only(year: u16) -> Result<Self, InvalidDate> {
        Self::new(year, None, None)
    }

    pub fn ym(year: u16, month: u8) -> Result<Self, InvalidDate> {
        Self::new(year, Some(month), None)
    }

    pub fn ymd(year: u16, month: u8, day: u8) -> Result<Self, InvalidDate> {
        Self::new(year, Some(month), Some(day))
    }

    pub fn new(year: u16, month: Option<u8>, day: Option<u8>) -> Result<Self, InvalidDate> {
        let date = PartialDate { year, month, day };
        let invalid = || InvalidDate(date.to_string());
        if !(1000..=2999).contains(&year) {
            return Err(invalid());
        }
        match (month, day) {
            (None, Some(_)) => return Err(invalid()),
            (Some(m), _) if !(1..=12).contains(&m) => return Err(invalid()),
            (Some(m), Some(d)) if d < 1 || d > days_in_month(year as i32, m) => return Err(invalid()),
            _ => {}
        }
        Ok(date)
    }

    pub fn year(&self) -> u16 {
        self.year
    }

    pub fn month(&self) -> Option<u8> {
        self.month
    }

    pub fn day(&self) -> Option<u8> {
        self.day
    }

    pub fn precision(&self) -> Precision {
        match (self.month, self.day) {
            (_, Some(_)) => Precision::Day,
            (Some(_), None) => Precision::Month,
            _ => Precision::Year,
        }
    }

    /// Drops components finer than `precision`.
    pub fn truncate(&self, precision: Precision) -> PartialDate {
        match precision {
            Precision::Year => PartialDate { month: None, day: None, ..*self },
            Precision::Month => PartialDate { day: None, ..*self },
            Precision::Day => *self,
        }
    }

    /// XSD datatype local name matching the precision.
    pub fn xsd_type(&self) -> &'static str {
        match self.precision() {
            Precision::Year => "gYear",
            Precision::Month => "gYearMonth",
            Precision::Day => "date",
        }
    }
}

impl fmt::Display for PartialDate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}", self.year)?;
        if let Some(m) = self.month {
            write!(f, "-{m:02}")?;
        }
        if let Some(d) = self.day {
            write!(f, "-{d:02}")?;
        }
        Ok(())
    }
}

fn fixed_digits(s: &str, len: usize) -> Option<u16> {
    if s.len() != len || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

/// Accepts exactly `YYYY`, `YYYY-MM` or `YYYY-MM-DD`.
pub fn parse_partial_date(text: &str) -> Result<PartialDate, InvalidDate> {
    let invalid = || InvalidDate(text.to_string());
    let mut parts = text.split('-');
    let year = parts.next().and_then(|y| fixed_digits(y, 4)).ok_or_else(invalid)?;
    let month = match parts.next() {
        Some(m) => Some(fixed_digits(m, 2).ok_or_else(invalid)? as u8),
        None => None,
    };
    let day = match parts.next() {
        Some(d) => Some(fixed_digits(d, 2).ok_or_else(invalid)? as u8),
        None => None,
    };
    if parts.next().is_some() {
        return Err(invalid());
    }
    PartialDate::new(year, month, day).map_err(|_| invalid())
}

impl FromStr for PartialDate {
    type Err = InvalidDate;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_partial_date(s)
    }
}

impl TryFrom<String> for PartialDate {
    type Error = InvalidDate;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        parse_partial_date(&value)
    }
}

impl From<PartialDate> for String {
    fn from(date: PartialDate) -> String {
        date.to_string()
    }
}
