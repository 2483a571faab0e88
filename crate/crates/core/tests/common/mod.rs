//! Shared helpers for the integration tests: a seeded synthetic corpus, an
//! N-Triples line checker written against the W3C grammar, and calendar
//! oracles built on chrono.

#![allow(dead_code)]

use std::io::{self, Write};

use chrono::{Days, Months, NaiveDate};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::json;

use ocix::{build_index, ingest_stream, CitationIndex};

/// Knobs for the synthetic corpus.
#[derive(Debug, Clone, Copy)]
pub struct CorpusSpec {
    pub seed: u64,
    pub resources: usize,
    pub mean_refs: usize,
    /// Per-mille of references that point outside the corpus.
    pub dangling_permille: u32,
}

impl CorpusSpec {
    pub fn new(seed: u64, resources: usize, mean_refs: usize) -> Self {
        CorpusSpec { seed, resources, mean_refs, dangling_permille: 30 }
    }
}

/// DOI of the `i`-th synthetic resource. A few shapes carry codec punctuation.
pub fn synthetic_doi(i: usize) -> String {
    let prefix = 1000 + i % 97;
    match i % 7 {
        0 => format!("10.{prefix}/s0({i})2:3"),
        1 => format!("10.{prefix}/abc-{i}_x"),
        2 => format!("10.{prefix}/x;{i}<1>#+"),
        _ => format!("10.{prefix}/j.{i}"),
    }
}

fn random_date(rng: &mut StdRng) -> Option<String> {
    let year = rng.random_range(1950..=2023);
    let month = rng.random_range(1..=12u32);
    let day = rng.random_range(1..=28u32);
    match rng.random_range(0..10) {
        0 => None,
        1 | 2 => Some(format!("{year}")),
        3 | 4 => Some(format!("{year}-{month:02}")),
        _ => Some(format!("{year}-{month:02}-{day:02}")),
    }
}

fn pick<T: Clone>(rng: &mut StdRng, pool: &[T], max: usize) -> Vec<T> {
    let n = rng.random_range(0..=max);
    (0..n).map(|_| pool[rng.random_range(0..pool.len())].clone()).collect()
}

/// Streams the corpus as JSON Lines, one record per resource, in a shuffled
/// but seed-determined order.
pub fn write_corpus<W: Write>(spec: CorpusSpec, mut sink: W) -> io::Result<()> {
    let mut rng = StdRng::seed_from_u64(spec.seed);
    let orcids: Vec<String> = (0..50).map(|k| format!("0000-0002-{:04}-{:04}", 1000 + k, 3000 + k)).collect();
    let issns: Vec<String> = (0..20).map(|k| format!("{:04}-{:04}", 1000 + k, 2000 + k)).collect();
    let rors: Vec<String> = (0..20).map(|k| format!("0abc{k:03}{:02}", k % 100)).collect();
    let mut dangling = 0usize;
    let mut line = Vec::with_capacity(512);
    for i in 0..spec.resources {
        let mut refs = Vec::new();
        let n = rng.random_range(0..=2 * spec.mean_refs);
        for _ in 0..n {
            if rng.random_range(0..1000) < spec.dangling_permille {
                dangling += 1;
                refs.push(format!("10.9999/missing.{}", dangling % (spec.resources / 4 + 1)));
            } else {
                refs.push(synthetic_doi(rng.random_range(0..spec.resources)));
            }
        }
        if rng.random_range(0..50) == 0 {
            refs.push(synthetic_doi(i));
        }
        if !refs.is_empty() && rng.random_range(0..50) == 0 {
            refs.push(refs[0].to_uppercase());
        }
        let mut record = json!({
            "doi": synthetic_doi(i),
            "orcids": pick(&mut rng, &orcids, 2),
            "issns": pick(&mut rng, &issns, 1),
            "rors": pick(&mut rng, &rors, 1),
            "references": refs,
        });
        if let Some(date) = random_date(&mut rng) {
            record["date"] = date.into();
        }
        if i % 3 == 0 {
            record["title"] = format!("Synthetic work {i}").into();
        }
        line.clear();
        serde_json::to_writer(&mut line, &record)?;
        line.push(b'\n');
        sink.write_all(&line)?;
    }
    sink.flush()
}

pub fn corpus_text(spec: CorpusSpec) -> String {
    let mut buf = Vec::new();
    write_corpus(spec, &mut buf).unwrap();
    String::from_utf8(buf).unwrap()
}

pub fn index_from_text(text: &str) -> CitationIndex {
    let (resources, report) = ingest_stream(text.as_bytes()).unwrap();
    assert!(report.is_balanced());
    build_index(resources).unwrap()
}

/// The two-record corpus: 10.1/a (2020) cites 10.1/b (2018).
pub const TWO_RECORDS: &str = concat!(
    "{\"doi\":\"10.1/a\",\"date\":\"2020\",\"references\":[\"10.1/b\"]}\n",
    "{\"doi\":\"10.1/b\",\"date\":\"2018\"}\n",
);

/// One parsed N-Triples statement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NtLine {
    pub subject: String,
    pub predicate: String,
    pub object: String,
}

struct Cursor<'a> {
    s: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> Result<(), String> {
        if self.peek() == Some(b) {
            self.pos += 1;
            Ok(())
        } else {
            Err(format!("expected {:?} at byte {}", b as char, self.pos))
        }
    }

    fn ws(&mut self) -> usize {
        let start = self.pos;
        while matches!(self.peek(), Some(b' ' | b'\t')) {
            self.pos += 1;
        }
        self.pos - start
    }

    fn hex(&mut self, n: usize) -> Result<(), String> {
        for _ in 0..n {
            match self.peek() {
                Some(c) if c.is_ascii_hexdigit() => self.pos += 1,
                _ => return Err(format!("bad hex escape at byte {}", self.pos)),
            }
        }
        Ok(())
    }

    fn uchar(&mut self) -> Result<(), String> {
        self.eat(b'\\')?;
        match self.peek() {
            Some(b'u') => {
                self.pos += 1;
                self.hex(4)
            }
            Some(b'U') => {
                self.pos += 1;
                self.hex(8)
            }
            _ => Err(format!("bad UCHAR at byte {}", self.pos)),
        }
    }

    fn iriref(&mut self) -> Result<String, String> {
        let start = self.pos;
        self.eat(b'<')?;
        loop {
            match self.peek() {
                None => return Err("unterminated IRI".into()),
                Some(b'>') => break,
                Some(b'\\') => self.uchar()?,
                Some(c) if c <= 0x20 || b"<\"{}|^`".contains(&c) => {
                    return Err(format!("illegal IRI byte {c:#x} at {}", self.pos))
                }
                Some(_) => self.pos += 1,
            }
        }
        self.pos += 1;
        let iri = std::str::from_utf8(&self.s[start..self.pos]).unwrap().to_string();
        let body = &iri[1..iri.len() - 1];
        let scheme_end = body.find(':').ok_or("relative IRI")?;
        let scheme = &body[..scheme_end];
        let valid_scheme = scheme.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
            && scheme.chars().all(|c| c.is_ascii_alphanumeric() || "+-.".contains(c));
        if !valid_scheme {
            return Err(format!("bad IRI scheme in {iri}"));
        }
        Ok(iri)
    }

    fn blank(&mut self) -> Result<String, String> {
        let start = self.pos;
        self.eat(b'_')?;
        self.eat(b':')?;
        let label = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_' || c == b'-' || c == b'.') {
            self.pos += 1;
        }
        if self.pos == label || self.s[self.pos - 1] == b'.' {
            return Err("bad blank node label".into());
        }
        Ok(std::str::from_utf8(&self.s[start..self.pos]).unwrap().to_string())
    }

    fn literal(&mut self) -> Result<String, String> {
        let start = self.pos;
        self.eat(b'"')?;
        loop {
            match self.peek() {
                None | Some(b'\n' | b'\r') => return Err("unterminated literal".into()),
                Some(b'"') => break,
                Some(b'\\') => match self.s.get(self.pos + 1) {
                    Some(b't' | b'b' | b'n' | b'r' | b'f' | b'"' | b'\'' | b'\\') => self.pos += 2,
                    _ => self.uchar()?,
                },
                Some(_) => self.pos += 1,
            }
        }
        self.pos += 1;
        if self.peek() == Some(b'^') {
            self.eat(b'^')?;
            self.eat(b'^')?;
            self.iriref()?;
        } else if self.peek() == Some(b'@') {
            self.pos += 1;
            let tag = self.pos;
            while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'-') {
                self.pos += 1;
            }
            if self.pos == tag {
                return Err("empty language tag".into());
            }
        }
        Ok(std::str::from_utf8(&self.s[start..self.pos]).unwrap().to_string())
    }
}

/// Parses one N-Triples line (without its terminator).
pub fn parse_nt_line(line: &str) -> Result<NtLine, String> {
    let mut c = Cursor { s: line.as_bytes(), pos: 0 };
    c.ws();
    let subject = match c.peek() {
        Some(b'<') => c.iriref()?,
        Some(b'_') => c.blank()?,
        _ => return Err("bad subject".into()),
    };
    c.ws();
    let predicate = c.iriref()?;
    c.ws();
    let object = match c.peek() {
        Some(b'<') => c.iriref()?,
        Some(b'_') => c.blank()?,
        Some(b'"') => c.literal()?,
        _ => return Err("bad object".into()),
    };
    c.ws();
    c.eat(b'.')?;
    c.ws();
    if c.pos != line.len() {
        return Err(format!("trailing bytes at {}", c.pos));
    }
    Ok(NtLine { subject, predicate, object })
}

/// Checks a whole document: LF-terminated lines, each a valid statement.
pub fn check_ntriples(doc: &str) -> Result<Vec<NtLine>, String> {
    if doc.is_empty() {
        return Ok(Vec::new());
    }
    let body = doc.strip_suffix('\n').ok_or("document must end with LF")?;
    body.split('\n')
        .enumerate()
        .map(|(i, line)| parse_nt_line(line).map_err(|e| format!("line {}: {e}: {line}", i + 1)))
        .collect()
}

pub fn naive(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).unwrap()
}

/// Days from `from` to `to` (`from <= to`) by stepping one day at a time.
pub fn brute_force_days(from: NaiveDate, to: NaiveDate) -> u32 {
    let mut n = 0;
    let mut d = from;
    while d < to {
        d = d.succ_opt().unwrap();
        n += 1;
    }
    n
}

/// Adds a years/months/days interval to `anchor`, clamping the day of month
/// after the month step (chrono's month arithmetic clamps).
pub fn re_expand(anchor: NaiveDate, years: u32, months: u32, days: u32) -> NaiveDate {
    anchor
        .checked_add_months(Months::new(years * 12 + months))
        .unwrap()
        .checked_add_days(Days::new(days as u64))
        .unwrap()
}

pub fn random_day(rng: &mut StdRng) -> NaiveDate {
    let start = naive(1900, 1, 1);
    let span = brute_force_days(start, naive(2100, 12, 31));
    start.checked_add_days(Days::new(rng.random_range(0..=span) as u64)).unwrap()
}

/// Peak resident set size of this process in bytes (Linux `VmHWM`).
pub fn peak_rss_bytes() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}

/// Current resident set size in bytes (Linux `VmRSS`).
pub fn rss_bytes() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmRSS:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}
