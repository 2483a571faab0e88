//! The citation index: every citation is an entity with its own OCI and
//! metadata, built once from ingested resources and read-only afterwards.
//!
//! Storage is compact: every DOI seen as citing or cited gets a node id in
//! DOI order, citations are kept sorted by (citing, cited) node id so they
//! double as the outgoing adjacency, and incoming adjacency is a permutation
//! over the same array. Owned [`CitationRecord`]s are materialized on demand.

mod export;
mod timespan;

use std::collections::BTreeSet;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::date::PartialDate;
use crate::identifiers::{decode_oci, encode_oci, Doi, IdentifierError, Oci};
use crate::ingestion::BibResource;

pub use export::{write_csv, write_csv_records, CSV_HEADER};
pub use timespan::{compute_timespan, InvalidTimeSpan, TimeSpan};

const NONE: u32 = u32::MAX;

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("duplicate resource DOI {0}")]
    DuplicateResourceDoi(Doi),
    #[error("unknown OCI {0}")]
    UnknownOci(String),
    #[error(transparent)]
    Identifier(#[from] IdentifierError),
    #[error("index too large: {0}")]
    Capacity(&'static str),
}

impl IndexError {
    pub fn name(&self) -> &'static str {
        match self {
            IndexError::DuplicateResourceDoi(_) => "DuplicateResourceDoi",
            IndexError::UnknownOci(_) => "UnknownOci",
            IndexError::Identifier(e) => e.name(),
            IndexError::Capacity(_) => "Capacity",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelfCitationType {
    Author,
    Journal,
    Institutional,
}

impl SelfCitationType {
    pub const ALL: [SelfCitationType; 3] =
        [SelfCitationType::Author, SelfCitationType::Journal, SelfCitationType::Institutional];

    fn bit(self) -> u8 {
        1 << self as u8
    }
}

impl fmt::Display for SelfCitationType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SelfCitationType::Author => "author",
            SelfCitationType::Journal => "journal",
            SelfCitationType::Institutional => "institutional",
        })
    }
}

/// Set of self-citation classes carried by one citation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct SelfCitations(u8);

impl SelfCitations {
    pub fn empty() -> Self {
        SelfCitations(0)
    }

    pub fn insert(&mut self, kind: SelfCitationType) {
        self.0 |= kind.bit();
    }

    pub fn contains(&self, kind: SelfCitationType) -> bool {
        self.0 & kind.bit() != 0
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(&self) -> impl Iterator<Item = SelfCitationType> + '_ {
        SelfCitationType::ALL.into_iter().filter(|k| self.contains(*k))
    }
}

impl FromIterator<SelfCitationType> for SelfCitations {
    fn from_iter<I: IntoIterator<Item = SelfCitationType>>(iter: I) -> Self {
        let mut set = SelfCitations::empty();
        for k in iter {
            set.insert(k);
        }
        set
    }
}

impl Serialize for SelfCitations {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for SelfCitations {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(BTreeSet::<SelfCitationType>::deserialize(d)?.into_iter().collect())
    }
}

/// Self-citation classes shared by two resources with metadata.
pub fn classify_self_citation(citing: &BibResource, cited: &BibResource) -> SelfCitations {
    let mut set = SelfCitations::empty();
    if !citing.author_orcids.is_disjoint(&cited.author_orcids) {
        set.insert(SelfCitationType::Author);
    }
    if !citing.issns.is_disjoint(&cited.issns) {
        set.insert(SelfCitationType::Journal);
    }
    if !citing.ror_ids.is_disjoint(&cited.ror_ids) {
        set.insert(SelfCitationType::Institutional);
    }
    set
}

/// A citation as a first-class entity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CitationRecord {
    pub oci: Oci,
    pub citing: Doi,
    pub cited: Doi,
    pub creation: Option<PartialDate>,
    pub timespan: Option<TimeSpan>,
    pub self_citation: SelfCitations,
    pub dangling_cited: bool,
}

#[derive(Debug, Clone, Copy)]
struct Citation {
    citing: u32,
    cited: u32,
    timespan: Option<TimeSpan>,
    self_citation: SelfCitations,
    dangling: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildReport {
    pub resources: u64,
    pub citations: u64,
    pub dangling_citations: u64,
    pub duplicate_references_dropped: u64,
    pub self_references_dropped: u64,
}

pub struct CitationIndex {
    nodes: Vec<Doi>,
    resource_of: Vec<u32>,
    resources: Vec<BibResource>,
    citations: Vec<Citation>,
    out_offsets: Vec<u32>,
    in_offsets: Vec<u32>,
    incoming: Vec<u32>,
    report: BuildReport,
}

impl fmt::Debug for CitationIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CitationIndex")
            .field("nodes", &self.nodes.len())
            .field("citations", &self.citations.len())
            .field("report", &self.report)
            .finish()
    }
}

fn as_u32(n: usize, what: &'static str) -> Result<u32, IndexError> {
    u32::try_from(n).ok().filter(|&v| v != NONE).ok_or(IndexError::Capacity(what))
}

/// Builds the index. One citation per distinct (citing, cited) pair.
pub fn build_index(mut resources: Vec<BibResource>) -> Result<CitationIndex, IndexError> {
    resources.par_sort_unstable_by(|a, b| a.doi.cmp(&b.doi));
    if let Some(w) = resources.windows(2).find(|w| w[0].doi == w[1].doi) {
        return Err(IndexError::DuplicateResourceDoi(w[0].doi.clone()));
    }
    as_u32(resources.len(), "resources")?;

    let mut all: Vec<&Doi> =
        resources.iter().flat_map(|r| std::iter::once(&r.doi).chain(r.references.iter())).collect();
    all.par_sort_unstable();
    all.dedup();
    as_u32(all.len(), "nodes")?;
    let nodes: Vec<Doi> = all.into_iter().cloned().collect();
    let node_id = |doi: &Doi| nodes.binary_search(doi).expect("every DOI is a node") as u32;

    let mut resource_of = vec![NONE; nodes.len()];
    for (i, r) in resources.iter().enumerate() {
        resource_of[node_id(&r.doi) as usize] = i as u32;
    }

    let per_resource: Vec<(Vec<Citation>, u64, u64)> = resources
        .par_iter()
        .map(|r| {
            let citing = node_id(&r.doi);
            let mut cited: Vec<u32> = r.references.iter().map(node_id).collect();
            cited.sort_unstable();
            let before = cited.len();
            cited.dedup();
            let duplicates = (before - cited.len()) as u64;
            let self_refs = cited.iter().filter(|&&c| c == citing).count() as u64;
            let out = cited
                .into_iter()
                .filter(|&c| c != citing)
                .map(|c| {
                    let target = resource_of[c as usize];
                    if target == NONE {
                        return Citation {
                            citing,
                            cited: c,
                            timespan: None,
                            self_citation: SelfCitations::empty(),
                            dangling: true,
                        };
                    }
                    let target = &resources[target as usize];
                    let timespan = match (r.pub_date, target.pub_date) {
                        (Some(a), Some(b)) => Some(compute_timespan(a, b)),
                        _ => None,
                    };
                    Citation {
                        citing,
                        cited: c,
                        timespan,
                        self_citation: classify_self_citation(r, target),
                        dangling: false,
                    }
                })
                .collect();
            (out, duplicates, self_refs)
        })
        .collect();

    let total: usize = per_resource.iter().map(|(c, _, _)| c.len()).sum();
    as_u32(total, "citations")?;
    let mut report = BuildReport { resources: resources.len() as u64, ..BuildReport::default() };
    // Resources are in DOI order, so citing node ids ascend across chunks.
    let mut citations = Vec::with_capacity(total);
    for (chunk, duplicates, self_refs) in per_resource {
        report.duplicate_references_dropped += duplicates;
        report.self_references_dropped += self_refs;
        citations.extend(chunk);
    }
    report.citations = citations.len() as u64;
    report.dangling_citations = citations.iter().filter(|c| c.dangling).count() as u64;

    let mut out_offsets = vec![0u32; nodes.len() + 1];
    let mut in_offsets = vec![0u32; nodes.len() + 1];
    for c in &citations {
        out_offsets[c.citing as usize + 1] += 1;
        in_offsets[c.cited as usize + 1] += 1;
    }
    for i in 0..nodes.len() {
        out_offsets[i + 1] += out_offsets[i];
        in_offsets[i + 1] += in_offsets[i];
    }
    let mut cursor = in_offsets.clone();
    let mut incoming = vec![0u32; citations.len()];
    for (i, c) in citations.iter().enumerate() {
        let slot = &mut cursor[c.cited as usize];
        incoming[*slot as usize] = i as u32;
        *slot += 1;
    }

    Ok(CitationIndex { nodes, resource_of, resources, citations, out_offsets, in_offsets, incoming, report })
}

impl CitationIndex {
    pub fn len(&self) -> usize {
        self.citations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.citations.is_empty()
    }

    pub fn report(&self) -> &BuildReport {
        &self.report
    }

    /// Resources with metadata, sorted by DOI.
    pub fn resources(&self) -> &[BibResource] {
        &self.resources
    }

    /// Every DOI taking part in the index as a resource, citing or cited entity.
    pub fn dois(&self) -> impl Iterator<Item = &Doi> {
        self.nodes.iter()
    }

    pub fn resource(&self, doi: &Doi) -> Option<&BibResource> {
        let node = self.node(doi)?;
        match self.resource_of[node] {
            NONE => None,
            i => Some(&self.resources[i as usize]),
        }
    }

    fn node(&self, doi: &Doi) -> Option<usize> {
        self.nodes.binary_search(doi).ok()
    }

    fn record(&self, i: usize) -> CitationRecord {
        let c = &self.citations[i];
        let citing = self.nodes[c.citing as usize].clone();
        let cited = self.nodes[c.cited as usize].clone();
        let creation = self.resources[self.resource_of[c.citing as usize] as usize].pub_date;
        CitationRecord {
            oci: encode_oci(&citing, &cited),
            citing,
            cited,
            creation,
            timespan: c.timespan,
            self_citation: c.self_citation,
            dangling_cited: c.dangling,
        }
    }

    fn outgoing_range(&self, node: usize) -> std::ops::Range<usize> {
        self.out_offsets[node] as usize..self.out_offsets[node + 1] as usize
    }

    fn incoming_slice(&self, node: usize) -> &[u32] {
        &self.incoming[self.in_offsets[node] as usize..self.in_offsets[node + 1] as usize]
    }

    /// Citations received by `doi`, ordered by citing DOI.
    pub fn lookup_citations(&self, doi: &Doi) -> Vec<CitationRecord> {
        match self.node(doi) {
            Some(n) => self.incoming_slice(n).iter().map(|&i| self.record(i as usize)).collect(),
            None => Vec::new(),
        }
    }

    /// Citations made by `doi`, ordered by cited DOI.
    pub fn lookup_references(&self, doi: &Doi) -> Vec<CitationRecord> {
        match self.node(doi) {
            Some(n) => self.outgoing_range(n).map(|i| self.record(i)).collect(),
            None => Vec::new(),
        }
    }

    pub fn citation_count(&self, doi: &Doi) -> usize {
        self.node(doi).map_or(0, |n| self.incoming_slice(n).len())
    }

    pub fn reference_count(&self, doi: &Doi) -> usize {
        self.node(doi).map_or(0, |n| self.outgoing_range(n).len())
    }

    pub fn lookup_by_oci(&self, oci: &Oci) -> Result<CitationRecord, IndexError> {
        let (citing, cited) = oci.decode();
        self.find(&citing, &cited).ok_or_else(|| IndexError::UnknownOci(oci.to_string()))
    }

    /// Parses and looks up an OCI string.
    pub fn lookup_by_oci_str(&self, oci: &str) -> Result<CitationRecord, IndexError> {
        let (citing, cited) = decode_oci(oci)?;
        self.find(&citing, &cited).ok_or_else(|| IndexError::UnknownOci(oci.to_string()))
    }

    fn find(&self, citing: &Doi, cited: &Doi) -> Option<CitationRecord> {
        let from = self.node(citing)?;
        let to = self.node(cited)? as u32;
        let range = self.outgoing_range(from);
        let start = range.start;
        self.citations[range].binary_search_by_key(&to, |c| c.cited).ok().map(|i| self.record(start + i))
    }

    pub fn contains_pair(&self, citing: &Doi, cited: &Doi) -> bool {
        self.find(citing, cited).is_some()
    }

    /// All citations in (citing DOI, cited DOI) order.
    pub fn records(&self) -> impl Iterator<Item = CitationRecord> + '_ {
        (0..self.citations.len()).map(|i| self.record(i))
    }

    /// All citations in (citing DOI, cited DOI) order, as borrowed rows.
    pub fn rows(&self) -> impl Iterator<Item = CitationRow<'_>> + '_ {
        (0..self.citations.len()).map(|i| self.row(i))
    }

    /// Number of DOIs that cite or are cited at least once.
    pub fn participant_count(&self) -> usize {
        (0..self.nodes.len())
            .filter(|&n| self.out_offsets[n] != self.out_offsets[n + 1] || self.in_offsets[n] != self.in_offsets[n + 1])
            .count()
    }

    /// Citation positions in OCI string order.
    fn oci_order(&self) -> Vec<u32> {
        let mut by_code: Vec<u32> = (0..self.nodes.len() as u32).collect();
        by_code.par_sort_unstable_by(|&a, &b| self.nodes[a as usize].cmp_encoded(&self.nodes[b as usize]));
        let mut rank = vec![0u32; self.nodes.len()];
        for (r, &n) in by_code.iter().enumerate() {
            rank[n as usize] = r as u32;
        }
        let mut order: Vec<u32> = (0..self.citations.len() as u32).collect();
        order.par_sort_unstable_by_key(|&i| {
            let c = &self.citations[i as usize];
            ((rank[c.citing as usize] as u64) << 32) | rank[c.cited as usize] as u64
        });
        order
    }

    /// All citations in OCI order, as borrowed rows.
    pub fn rows_by_oci(&self) -> impl Iterator<Item = CitationRow<'_>> + '_ {
        self.oci_order().into_iter().map(move |i| self.row(i as usize))
    }

    fn row(&self, i: usize) -> CitationRow<'_> {
        let c = &self.citations[i];
        CitationRow {
            citing: &self.nodes[c.citing as usize],
            cited: &self.nodes[c.cited as usize],
            creation: self.resources[self.resource_of[c.citing as usize] as usize].pub_date,
            timespan: c.timespan,
            self_citation: c.self_citation,
            dangling_cited: c.dangling,
        }
    }
}

/// Borrowed view of one citation, used by the exporters.
#[derive(Debug, Clone, Copy)]
pub struct CitationRow<'a> {
    pub citing: &'a Doi,
    pub cited: &'a Doi,
    pub creation: Option<PartialDate>,
    pub timespan: Option<TimeSpan>,
    pub self_citation: SelfCitations,
    pub dangling_cited: bool,
}

impl CitationRow<'_> {
    pub fn oci(&self) -> Oci {
        encode_oci(self.citing, self.cited)
    }

    pub fn to_record(&self) -> CitationRecord {
        CitationRecord {
            oci: self.oci(),
            citing: self.citing.clone(),
            cited: self.cited.clone(),
            creation: self.creation,
            timespan: self.timespan,
            self_citation: self.self_citation,
            dangling_cited: self.dangling_cited,
        }
    }
}
