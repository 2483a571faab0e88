//! Streaming JSON Lines ingestion of bibliographic dumps.
//!
//! Each line holds one record:
//!
//! ```json
//! {"doi":"10.1/a","title":"...","date":"2020-03","orcids":[],"authors":[],
//!  "issns":[],"rors":[],"references":["10.2/b"]}
//! ```
//!
//! Only `doi` is required and unknown fields are ignored. Bad lines never abort
//! a run; they are counted in the [`IngestReport`] together with the first
//! offending line numbers.

use std::collections::hash_map::Entry;
use std::collections::{BTreeSet, HashMap, HashSet};
use std::io::{self, BufRead};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::date::{parse_partial_date, PartialDate};
use crate::identifiers::{normalize_doi, Doi, IdentifierError};

/// Line numbers kept per error category.
pub const SAMPLE_LIMIT: usize = 100;

/// Lines longer than this are rejected without being buffered.
pub const MAX_LINE_BYTES: usize = 16 * 1024 * 1024;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("malformed record: {0}")]
    MalformedRecord(String),
    #[error(transparent)]
    InvalidDoi(#[from] IdentifierError),
    #[error("read failure: {0}")]
    IoFailure(#[from] io::Error),
}

impl IngestError {
    pub fn name(&self) -> &'static str {
        match self {
            IngestError::MalformedRecord(_) => "MalformedRecord",
            // The own-DOI failure is reported as InvalidDoi whatever the cause.
            IngestError::InvalidDoi(_) => "InvalidDoi",
            IngestError::IoFailure(_) => "IoFailure",
        }
    }
}

/// One bibliographic record after normalization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BibResource {
    pub doi: Doi,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pub_date: Option<PartialDate>,
    #[serde(default)]
    pub author_orcids: BTreeSet<String>,
    #[serde(default)]
    pub author_names: Vec<String>,
    #[serde(default)]
    pub issns: BTreeSet<String>,
    #[serde(default)]
    pub ror_ids: BTreeSet<String>,
    #[serde(default)]
    pub references: Vec<Doi>,
}

impl BibResource {
    pub fn new(doi: Doi) -> Self {
        BibResource {
            doi,
            title: None,
            pub_date: None,
            author_orcids: BTreeSet::new(),
            author_names: Vec::new(),
            issns: BTreeSet::new(),
            ror_ids: BTreeSet::new(),
            references: Vec::new(),
        }
    }

    /// Folds a later record for the same DOI into this one.
    ///
    /// Scalars: the later value wins when it is present. Sets and references:
    /// union, keeping first-seen order for the lists.
    pub fn merge_from(&mut self, later: BibResource) {
        debug_assert_eq!(self.doi, later.doi);
        if later.title.is_some() {
            self.title = later.title;
        }
        if later.pub_date.is_some() {
            self.pub_date = later.pub_date;
        }
        self.author_orcids.extend(later.author_orcids);
        self.issns.extend(later.issns);
        self.ror_ids.extend(later.ror_ids);
        for name in later.author_names {
            if !self.author_names.contains(&name) {
                self.author_names.push(name);
            }
        }
        if !later.references.is_empty() {
            let mut seen: HashSet<Doi> = self.references.iter().cloned().collect();
            for r in later.references {
                if seen.insert(r.clone()) {
                    self.references.push(r);
                }
            }
        }
    }
}

/// Non-fatal problems found while parsing a single record.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RecordIssues {
    pub duplicate_references: u64,
    pub self_references: u64,
    pub invalid_references: u64,
    pub invalid_dates: u64,
    pub invalid_identifiers: u64,
}

#[derive(Deserialize)]
struct RawRecord {
    doi: String,
    #[serde(default)]
    title: Option<String>,
    #[serde(default)]
    date: Option<String>,
    #[serde(default)]
    orcids: Option<Vec<String>>,
    #[serde(default)]
    authors: Option<Vec<String>>,
    #[serde(default)]
    issns: Option<Vec<String>>,
    #[serde(default)]
    rors: Option<Vec<String>>,
    #[serde(default)]
    references: Option<Vec<String>>,
}

/// `0000-0002-1825-0097`, optionally given as an orcid.org URL.
pub fn normalize_orcid(raw: &str) -> Option<String> {
    let s = raw.trim();
    let s = s
        .strip_prefix("https://orcid.org/")
        .or_else(|| s.strip_prefix("http://orcid.org/"))
        .unwrap_or(s)
        .to_ascii_uppercase();
    let b = s.as_bytes();
    let shape = b.len() == 19
        && b.iter().enumerate().all(|(i, &c)| match i {
            4 | 9 | 14 => c == b'-',
            18 => c.is_ascii_digit() || c == b'X',
            _ => c.is_ascii_digit(),
        });
    shape.then_some(s)
}

/// `NNNN-NNNC`; the hyphen may be omitted on input.
pub fn normalize_issn(raw: &str) -> Option<String> {
    let mut s = raw.trim().to_ascii_uppercase();
    if s.len() == 8 && !s.contains('-') {
        s.insert(4, '-');
    }
    let b = s.as_bytes();
    let shape = b.len() == 9
        && b.iter().enumerate().all(|(i, &c)| match i {
            4 => c == b'-',
            8 => c.is_ascii_digit() || c == b'X',
            _ => c.is_ascii_digit(),
        });
    shape.then_some(s)
}

/// Bare nine-character ROR id such as `03yrm5c26`, optionally as a ror.org URL.
pub fn normalize_ror(raw: &str) -> Option<String> {
    let s = raw.trim();
    let s = s
        .strip_prefix("https://ror.org/")
        .or_else(|| s.strip_prefix("http://ror.org/"))
        .unwrap_or(s)
        .to_ascii_lowercase();
    let b = s.as_bytes();
    let shape = b.len() == 9
        && b[0] == b'0'
        && b.iter().all(|c| c.is_ascii_alphanumeric())
        && b[7..].iter().all(|c| c.is_ascii_digit());
    shape.then_some(s)
}

fn collect_ids(
    raw: Option<Vec<String>>,
    normalize: fn(&str) -> Option<String>,
    issues: &mut RecordIssues,
) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for value in raw.unwrap_or_default() {
        match normalize(&value) {
            Some(v) => {
                out.insert(v);
            }
            None => issues.invalid_identifiers += 1,
        }
    }
    out
}

/// Parses one JSON Lines record.
///
/// Fails only when the line is not a record or its own DOI is invalid. Bad
/// references, dates and author/venue/institution ids are dropped and counted.
pub fn parse_record(line: &str) -> Result<(BibResource, RecordIssues), IngestError> {
    let raw: RawRecord = serde_json::from_str(line).map_err(|e| IngestError::MalformedRecord(e.to_string()))?;
    let doi = normalize_doi(&raw.doi)?;
    let mut issues = RecordIssues::default();

    let pub_date = raw
        .date
        .as_deref()
        .map(str::trim)
        .filter(|d| !d.is_empty())
        .and_then(|d| parse_partial_date(d).map_err(|_| issues.invalid_dates += 1).ok());

    let mut references = Vec::new();
    let mut seen = HashSet::new();
    for r in raw.references.unwrap_or_default() {
        match normalize_doi(&r) {
            Ok(r) if r == doi => issues.self_references += 1,
            Ok(r) => {
                if seen.insert(r.clone()) {
                    references.push(r);
                } else {
                    issues.duplicate_references += 1;
                }
            }
            Err(_) => issues.invalid_references += 1,
        }
    }

    let resource = BibResource {
        doi,
        title: raw.title.filter(|t| !t.trim().is_empty()),
        pub_date,
        author_orcids: collect_ids(raw.orcids, normalize_orcid, &mut issues),
        author_names: raw.authors.unwrap_or_default().into_iter().filter(|a| !a.trim().is_empty()).collect(),
        issns: collect_ids(raw.issns, normalize_issn, &mut issues),
        ror_ids: collect_ids(raw.rors, normalize_ror, &mut issues),
        references,
    };
    Ok((resource, issues))
}

/// Counter plus the first [`SAMPLE_LIMIT`] line numbers that contributed to it.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub count: u64,
    pub sample_lines: Vec<u64>,
}

impl Tally {
    fn add(&mut self, n: u64, line: u64) {
        if n == 0 {
            return;
        }
        self.count += n;
        if self.sample_lines.len() < SAMPLE_LIMIT {
            self.sample_lines.push(line);
        }
    }

    fn absorb(&mut self, other: Tally) {
        self.count += other.count;
        let room = SAMPLE_LIMIT.saturating_sub(self.sample_lines.len());
        self.sample_lines.extend(other.sample_lines.into_iter().take(room));
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub lines_read: u64,
    pub resources_accepted: u64,
    /// Lines rejected outright: unparseable, oversized, or with an invalid own DOI.
    pub malformed_lines: Tally,
    /// Invalid DOIs, both record DOIs and reference DOIs.
    pub invalid_dois: Tally,
    pub duplicate_references_dropped: Tally,
    pub self_references_dropped: Tally,
    /// Records folded into an earlier record with the same DOI.
    pub merged_records: Tally,
    pub invalid_dates_dropped: Tally,
    pub invalid_identifiers_dropped: Tally,
}

impl IngestReport {
    /// `lines_read = resources_accepted + malformed_lines + merged_records`.
    pub fn is_balanced(&self) -> bool {
        self.lines_read == self.resources_accepted + self.malformed_lines.count + self.merged_records.count
    }
}

/// Accumulates records from one or more line streams, merging duplicate DOIs.
#[derive(Debug, Default)]
pub struct Ingest {
    resources: HashMap<Doi, BibResource>,
    report: IngestReport,
}

impl Ingest {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn report(&self) -> &IngestReport {
        &self.report
    }

    pub fn len(&self) -> usize {
        self.resources.len()
    }

    pub fn is_empty(&self) -> bool {
        self.resources.is_empty()
    }

    /// Processes one line. `line_no` is 1-based and only used for samples.
    pub fn push_line(&mut self, line: &str, line_no: u64) {
        if line.trim().is_empty() {
            return;
        }
        self.report.lines_read += 1;
        match parse_record(line) {
            Ok((resource, issues)) => {
                let r = &mut self.report;
                r.invalid_dois.add(issues.invalid_references, line_no);
                r.duplicate_references_dropped.add(issues.duplicate_references, line_no);
                r.self_references_dropped.add(issues.self_references, line_no);
                r.invalid_dates_dropped.add(issues.invalid_dates, line_no);
                r.invalid_identifiers_dropped.add(issues.invalid_identifiers, line_no);
                self.insert(resource, line_no);
            }
            Err(err) => self.reject(&err, line_no),
        }
    }

    fn reject(&mut self, err: &IngestError, line_no: u64) {
        if let IngestError::InvalidDoi(_) = err {
            self.report.invalid_dois.add(1, line_no);
        }
        self.report.malformed_lines.add(1, line_no);
    }

    fn insert(&mut self, resource: BibResource, line_no: u64) {
        match self.resources.entry(resource.doi.clone()) {
            Entry::Occupied(mut e) => {
                e.get_mut().merge_from(resource);
                self.report.merged_records.add(1, line_no);
            }
            Entry::Vacant(e) => {
                e.insert(resource);
                self.report.resources_accepted += 1;
            }
        }
    }

    /// Reads `source` line by line until EOF. Only read errors are fatal.
    pub fn read_stream<R: BufRead>(&mut self, mut source: R) -> io::Result<()> {
        let mut buf = Vec::new();
        let mut line_no = 0u64;
        loop {
            let outcome = read_bounded_line(&mut source, &mut buf, MAX_LINE_BYTES)?;
            let oversized = match outcome {
                LineRead::Eof => break,
                LineRead::Line => false,
                LineRead::Oversized => true,
            };
            line_no += 1;
            if oversized {
                self.report.lines_read += 1;
                self.report.malformed_lines.add(1, line_no);
                continue;
            }
            match std::str::from_utf8(&buf) {
                Ok(line) => self.push_line(line, line_no),
                Err(e) => {
                    self.report.lines_read += 1;
                    self.reject(&IngestError::MalformedRecord(e.to_string()), line_no);
                }
            }
        }
        Ok(())
    }

    /// Combines an independently ingested shard into this one.
    pub fn merge(&mut self, other: Ingest) {
        let report = other.report;
        self.report.lines_read += report.lines_read;
        self.report.malformed_lines.absorb(report.malformed_lines);
        self.report.invalid_dois.absorb(report.invalid_dois);
        self.report.duplicate_references_dropped.absorb(report.duplicate_references_dropped);
        self.report.self_references_dropped.absorb(report.self_references_dropped);
        self.report.merged_records.absorb(report.merged_records);
        self.report.invalid_dates_dropped.absorb(report.invalid_dates_dropped);
        self.report.invalid_identifiers_dropped.absorb(report.invalid_identifiers_dropped);
        for (doi, resource) in other.resources {
            match self.resources.entry(doi) {
                Entry::Occupied(mut e) => {
                    e.get_mut().merge_from(resource);
                    self.report.merged_records.count += 1;
                }
                Entry::Vacant(e) => {
                    e.insert(resource);
                    self.report.resources_accepted += 1;
                }
            }
        }
    }

    /// Resources sorted by DOI, plus the final report.
    pub fn finish(self) -> (Vec<BibResource>, IngestReport) {
        let mut resources: Vec<BibResource> = self.resources.into_values().collect();
        resources.sort_unstable_by(|a, b| a.doi.cmp(&b.doi));
        (resources, self.report)
    }
}

/// Ingests a whole line stream.
pub fn ingest_stream<R: BufRead>(source: R) -> Result<(Vec<BibResource>, IngestReport), IngestError> {
    let mut ingest = Ingest::new();
    ingest.read_stream(source)?;
    Ok(ingest.finish())
}

enum LineRead {
    Eof,
    Line,
    Oversized,
}

/// Reads one `\n`-terminated line into `buf` (without the terminator),
/// discarding rather than buffering anything past `limit` bytes.
fn read_bounded_line<R: BufRead>(source: &mut R, buf: &mut Vec<u8>, limit: usize) -> io::Result<LineRead> {
    buf.clear();
    let mut seen_any = false;
    let mut oversized = false;
    loop {
        let chunk = match source.fill_buf() {
            Ok(c) => c,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
            Err(e) => return Err(e),
        };
        if chunk.is_empty() {
            break;
        }
        seen_any = true;
        let (take, done) = match chunk.iter().position(|&b| b == b'\n') {
            Some(i) => (i, true),
            None => (chunk.len(), false),
        };
        if !oversized {
            if buf.len() + take > limit {
                oversized = true;
                buf.clear();
                buf.shrink_to(limit.min(64 * 1024));
            } else {
                buf.extend_from_slice(&chunk[..take]);
            }
        }
        source.consume(if done { take + 1 } else { take });
        if done {
            break;
        }
    }
    if !seen_any {
        return Ok(LineRead::Eof);
    }
    if buf.last() == Some(&b'\r') {
        buf.pop();
    }
    Ok(if oversized { LineRead::Oversized } else { LineRead::Line })
}
