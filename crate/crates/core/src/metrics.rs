//! Corpus statistics and coverage against a reference set of citation pairs.

use std::collections::BTreeSet;
use std::fmt;
use std::io::Read;

use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::identifiers::{normalize_doi, Doi, IdentifierError};
use crate::index::{CitationIndex, SelfCitationType};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("reference set is empty")]
    EmptyReferenceSet,
    #[error("reference set line {line}: {source}")]
    BadReferencePair {
        line: u64,
        #[source]
        source: IdentifierError,
    },
    #[error("reference set: {0}")]
    Csv(#[from] csv::Error),
}

impl MetricsError {
    pub fn name(&self) -> &'static str {
        match self {
            MetricsError::EmptyReferenceSet => "EmptyReferenceSet",
            MetricsError::BadReferencePair { source, .. } => source.name(),
            MetricsError::Csv(_) => "MalformedRecord",
        }
    }
}

/// An exact ratio `numerator / denominator` shown as a percentage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub struct Percentage {
    pub numerator: u64,
    pub denominator: u64,
}

impl Percentage {
    pub fn new(numerator: u64, denominator: u64) -> Self {
        assert!(denominator > 0, "percentage of an empty set");
        Percentage { numerator, denominator }
    }

    /// Percentage in tenths of a percent, rounded half up.
    pub fn tenths(&self) -> u64 {
        let (n, d) = (self.numerator as u128, self.denominator as u128);
        ((2000 * n + d) / (2 * d)) as u64
    }
}

impl fmt::Display for Percentage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = self.tenths();
        write!(f, "{}.{}", t / 10, t % 10)
    }
}

impl Serialize for Percentage {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Percentage", 3)?;
        st.serialize_field("numerator", &self.numerator)?;
        st.serialize_field("denominator", &self.denominator)?;
        st.serialize_field("percent", &self.to_string())?;
        st.end()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelfCitationCounts {
    pub author: u64,
    pub journal: u64,
    pub institutional: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorpusStats {
    pub citation_links: u64,
    /// Distinct DOIs that cite or are cited.
    pub bibliographic_resources: u64,
    pub dangling_citations: u64,
    pub self_citation_counts: SelfCitationCounts,
    pub citations_with_timespan: u64,
    /// Absent for an empty index.
    pub timespan_coverage: Option<Percentage>,
}

pub fn corpus_stats(index: &CitationIndex) -> CorpusStats {
    let mut stats = CorpusStats {
        citation_links: 0,
        bibliographic_resources: 0,
        dangling_citations: 0,
        self_citation_counts: SelfCitationCounts::default(),
        citations_with_timespan: 0,
        timespan_coverage: None,
    };
    for row in index.rows() {
        stats.citation_links += 1;
        stats.dangling_citations += row.dangling_cited as u64;
        stats.citations_with_timespan += row.timespan.is_some() as u64;
        let sc = &mut stats.self_citation_counts;
        sc.author += row.self_citation.contains(SelfCitationType::Author) as u64;
        sc.journal += row.self_citation.contains(SelfCitationType::Journal) as u64;
        sc.institutional += row.self_citation.contains(SelfCitationType::Institutional) as u64;
    }
    stats.bibliographic_resources = index.participant_count() as u64;
    if stats.citation_links > 0 {
        stats.timespan_coverage = Some(Percentage::new(stats.citations_with_timespan, stats.citation_links));
    }
    stats
}

/// Share of `reference_set` pairs present in the index.
pub fn coverage(index: &CitationIndex, reference_set: &BTreeSet<(Doi, Doi)>) -> Result<Percentage, MetricsError> {
    if reference_set.is_empty() {
        return Err(MetricsError::EmptyReferenceSet);
    }
    let found = reference_set.iter().filter(|(a, b)| index.contains_pair(a, b)).count();
    Ok(Percentage::new(found as u64, reference_set.len() as u64))
}

/// Reads a `citing,cited` CSV of raw or normalized DOIs.
pub fn read_reference_set<R: Read>(source: R) -> Result<BTreeSet<(Doi, Doi)>, MetricsError> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(source);
    let mut pairs = BTreeSet::new();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let line = i as u64 + 2;
        let norm = |field: Option<&str>| {
            normalize_doi(field.unwrap_or("")).map_err(|source| MetricsError::BadReferencePair { line, source })
        };
        pairs.insert((norm(row.get(0))?, norm(row.get(1))?));
    }
    Ok(pairs)
}
