//! Signed calendar intervals between publication dates.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::date::{days_in_month, PartialDate, Precision};

/// Elapsed time from the cited to the citing publication.
///
/// Rendered as an `xsd:duration` carrying components down to its precision:
/// `P2Y`, `P2Y3M`, `P2Y0M5D`, `-P1Y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct TimeSpan {
    negative: bool,
    years: u16,
    months: Option<u8>,
    days: Option<u8>,
}

impl TimeSpan {
    fn new(negative: bool, years: u16, months: Option<u8>, days: Option<u8>) -> TimeSpan {
        let mut span = TimeSpan { negative, years, months, days };
        if span.is_zero() {
            span.negative = false;
        }
        span
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    pub fn years(&self) -> u16 {
        self.years
    }

    pub fn months(&self) -> Option<u8> {
        self.months
    }

    pub fn days(&self) -> Option<u8> {
        self.days
    }

    pub fn precision(&self) -> Precision {
        match (self.months, self.days) {
            (_, Some(_)) => Precision::Day,
            (Some(_), None) => Precision::Month,
            _ => Precision::Year,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.years == 0 && self.months.unwrap_or(0) == 0 && self.days.unwrap_or(0) == 0
    }

    pub fn negate(&self) -> TimeSpan {
        TimeSpan::new(!self.negative, self.years, self.months, self.days)
    }
}

impl fmt::Display for TimeSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negative {
            f.write_str("-")?;
        }
        write!(f, "P{}Y", self.years)?;
        if let Some(m) = self.months {
            write!(f, "{m}M")?;
        }
        if let Some(d) = self.days {
            write!(f, "{d}D")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid timespan {0:?}")]
pub struct InvalidTimeSpan(String);

impl FromStr for TimeSpan {
    type Err = InvalidTimeSpan;

    /// Parses exactly the canonical rendering produced by `Display`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let invalid = || InvalidTimeSpan(s.to_string());
        let (negative, rest) = match s.strip_prefix('-') {
            Some(r) => (true, r),
            None => (false, s),
        };
        let mut rest = rest.strip_prefix('P').ok_or_else(invalid)?;
        let mut take = |unit: char| -> Result<Option<u32>, InvalidTimeSpan> {
            match rest.find(unit) {
                Some(i) if i > 0 && rest[..i].bytes().all(|b| b.is_ascii_digit()) => {
                    let v = rest[..i].parse().map_err(|_| invalid())?;
                    rest = &rest[i + 1..];
                    Ok(Some(v))
                }
                Some(_) => Err(invalid()),
                None => Ok(None),
            }
        };
        let years = take('Y')?.ok_or_else(invalid)?;
        let months = take('M')?;
        let days = take('D')?;
        if !rest.is_empty()
            || years > u16::MAX as u32
            || months.is_some_and(|m| m > 11)
            || days.is_some_and(|d| d > 30)
            || (days.is_some() && months.is_none())
        {
            return Err(invalid());
        }
        let span = TimeSpan::new(negative, years as u16, months.map(|m| m as u8), days.map(|d| d as u8));
        if negative && span.is_zero() {
            return Err(invalid());
        }
        Ok(span)
    }
}

impl TryFrom<String> for TimeSpan {
    type Error = InvalidTimeSpan;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        value.parse()
    }
}

impl From<TimeSpan> for String {
    fn from(span: TimeSpan) -> String {
        span.to_string()
    }
}

/// Unsigned difference `later - earlier`, both already at the same precision.
fn forward_difference(later: PartialDate, earlier: PartialDate) -> TimeSpan {
    let mut years = later.year() as i32 - earlier.year() as i32;
    let (Some(lm), Some(em)) = (later.month(), earlier.month()) else {
        return TimeSpan::new(false, years as u16, None, None);
    };
    let mut months = lm as i32 - em as i32;
    let mut days = None;
    if let (Some(ld), Some(ed)) = (later.day(), earlier.day()) {
        let mut d = ld as i32 - ed as i32;
        if d < 0 {
            months -= 1;
            let (py, pm) = if lm == 1 { (later.year() as i32 - 1, 12) } else { (later.year() as i32, lm - 1) };
            let borrowed = days_in_month(py, pm) as i32;
            // An earlier day past the end of the borrowed month counts from that month's end.
            d = ld as i32 - (ed as i32).min(borrowed) + borrowed;
        }
        days = Some(d as u8);
    }
    if months < 0 {
        years -= 1;
        months += 12;
    }
    TimeSpan::new(false, years as u16, Some(months as u8), days)
}

/// Interval from `cited_date` to `citing_date` at their common precision.
///
/// Negative when the citing publication is dated before the cited one.
pub fn compute_timespan(citing_date: PartialDate, cited_date: PartialDate) -> TimeSpan {
    let precision = citing_date.precision().min(cited_date.precision());
    let citing = citing_date.truncate(precision);
    let cited = cited_date.truncate(precision);
    if citing >= cited {
        forward_difference(citing, cited)
    } else {
        forward_difference(cited, citing).negate()
    }
}
