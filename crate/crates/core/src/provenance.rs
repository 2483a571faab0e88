//! Append-only provenance ledger.
//!
//! Each entity (a citation OCI or a resource DOI) has a chain of numbered
//! snapshots. Snapshot `n` is valid from its `generated_at` until the next
//! snapshot's `generated_at`, recorded as its `invalidated_at`; only the latest
//! snapshot is open. Snapshots are persisted as JSON Lines, one per line.

use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};

use chrono::{DateTime, SubsecRound, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::index::CitationIndex;

#[derive(Debug, Error)]
pub enum ProvenanceError {
    #[error("entity {0} already has provenance")]
    AlreadyExists(String),
    #[error("no provenance for entity {0}")]
    UnknownEntity(String),
    #[error("timestamp {at} precedes latest snapshot of {entity} ({last})")]
    NonMonotonicTimestamp { entity: String, at: DateTime<Utc>, last: DateTime<Utc> },
    #[error("broken chain for {entity}: {reason}")]
    BrokenChain { entity: String, reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("bad provenance line {line}: {source}")]
    Json {
        line: u64,
        #[source]
        source: serde_json::Error,
    },
}

impl ProvenanceError {
    pub fn name(&self) -> &'static str {
        match self {
            ProvenanceError::AlreadyExists(_) => "AlreadyExists",
            ProvenanceError::UnknownEntity(_) => "UnknownEntity",
            ProvenanceError::NonMonotonicTimestamp { .. } => "NonMonotonicTimestamp",
            ProvenanceError::BrokenChain { .. } => "BrokenChain",
            ProvenanceError::Io(_) => "IoFailure",
            ProvenanceError::Json { .. } => "MalformedRecord",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChangeType {
    Creation,
    Modification,
    Merge,
}

/// Timestamps are stored at second resolution and rendered as RFC 3339.
mod rfc3339_seconds {
    use chrono::{DateTime, SecondsFormat, Utc};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(t: &DateTime<Utc>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&t.to_rfc3339_opts(SecondsFormat::Secs, true))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DateTime<Utc>, D::Error> {
        let s = String::deserialize(d)?;
        DateTime::parse_from_rfc3339(&s).map(|t| t.with_timezone(&Utc)).map_err(serde::de::Error::custom)
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(t: &Option<DateTime<Utc>>, s: S) -> Result<S::Ok, S::Error> {
            match t {
                Some(t) => super::serialize(t, s),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<DateTime<Utc>>, D::Error> {
            match Option::<String>::deserialize(d)? {
                Some(s) => DateTime::parse_from_rfc3339(&s)
                    .map(|t| Some(t.with_timezone(&Utc)))
                    .map_err(serde::de::Error::custom),
                None => Ok(None),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProvenanceSnapshot {
    pub entity_id: String,
    pub snapshot_number: u32,
    #[serde(with = "rfc3339_seconds")]
    pub generated_at: DateTime<Utc>,
    #[serde(with = "rfc3339_seconds::option")]
    pub invalidated_at: Option<DateTime<Utc>>,
    pub agent: String,
    pub source: String,
    pub change_type: ChangeType,
    pub description: String,
}

impl ProvenanceSnapshot {
    /// First snapshot of a newly created entity.
    pub fn creation(entity_id: &str, source: &str, agent: &str, at: DateTime<Utc>) -> Self {
        ProvenanceSnapshot {
            entity_id: entity_id.to_string(),
            snapshot_number: 1,
            generated_at: at.trunc_subsecs(0),
            invalidated_at: None,
            agent: agent.to_string(),
            source: source.to_string(),
            change_type: ChangeType::Creation,
            description: format!("Entity {entity_id} created from {source}."),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ProvenanceLedger {
    chains: BTreeMap<String, Vec<ProvenanceSnapshot>>,
}

impl ProvenanceLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entity_count(&self) -> usize {
        self.chains.len()
    }

    pub fn snapshot_count(&self) -> usize {
        self.chains.values().map(Vec::len).sum()
    }

    pub fn entities(&self) -> impl Iterator<Item = &str> {
        self.chains.keys().map(String::as_str)
    }

    pub fn record_creation(
        &mut self,
        entity_id: &str,
        source: &str,
        agent: &str,
        at: DateTime<Utc>,
    ) -> Result<ProvenanceSnapshot, ProvenanceError> {
        if self.chains.contains_key(entity_id) {
            return Err(ProvenanceError::AlreadyExists(entity_id.to_string()));
        }
        let snapshot = ProvenanceSnapshot::creation(entity_id, source, agent, at);
        self.chains.insert(entity_id.to_string(), vec![snapshot.clone()]);
        Ok(snapshot)
    }

    pub fn record_modification(
        &mut self,
        entity_id: &str,
        description: &str,
        agent: &str,
        at: DateTime<Utc>,
    ) -> Result<ProvenanceSnapshot, ProvenanceError> {
        self.append(entity_id, ChangeType::Modification, description, agent, at)
    }

    /// Records that another record's data was folded into this entity.
    pub fn record_merge(
        &mut self,
        entity_id: &str,
        description: &str,
        agent: &str,
        at: DateTime<Utc>,
    ) -> Result<ProvenanceSnapshot, ProvenanceError> {
        self.append(entity_id, ChangeType::Merge, description, agent, at)
    }

    fn append(
        &mut self,
        entity_id: &str,
        change_type: ChangeType,
        description: &str,
        agent: &str,
        at: DateTime<Utc>,
    ) -> Result<ProvenanceSnapshot, ProvenanceError> {
        let at = at.trunc_subsecs(0);
        let chain =
            self.chains.get_mut(entity_id).ok_or_else(|| ProvenanceError::UnknownEntity(entity_id.to_string()))?;
        let last = chain.last_mut().expect("chains are never empty");
        if at < last.generated_at {
            return Err(ProvenanceError::NonMonotonicTimestamp {
                entity: entity_id.to_string(),
                at,
                last: last.generated_at,
            });
        }
        last.invalidated_at = Some(at);
        let snapshot = ProvenanceSnapshot {
            entity_id: entity_id.to_string(),
            snapshot_number: last.snapshot_number + 1,
            generated_at: at,
            invalidated_at: None,
            agent: agent.to_string(),
            source: last.source.clone(),
            change_type,
            description: description.to_string(),
        };
        chain.push(snapshot.clone());
        Ok(snapshot)
    }

    /// Full chain in snapshot order; empty for an unknown entity.
    pub fn provenance_chain(&self, entity_id: &str) -> Vec<ProvenanceSnapshot> {
        self.chains.get(entity_id).cloned().unwrap_or_default()
    }

    pub fn latest(&self, entity_id: &str) -> Option<&ProvenanceSnapshot> {
        self.chains.get(entity_id).and_then(|c| c.last())
    }

    /// Checks numbering, timestamp linkage and monotonicity of every chain.
    pub fn verify(&self) -> Result<(), ProvenanceError> {
        for (entity, chain) in &self.chains {
            verify_chain(entity, chain)?;
        }
        Ok(())
    }

    pub fn write_jsonl<W: Write>(&self, mut sink: W) -> io::Result<u64> {
        let mut n = 0;
        for snapshot in self.chains.values().flatten() {
            serde_json::to_writer(&mut sink, snapshot)?;
            sink.write_all(b"\n")?;
            n += 1;
        }
        sink.flush()?;
        Ok(n)
    }

    /// Loads a sidecar file and verifies every chain.
    pub fn read_jsonl<R: BufRead>(source: R) -> Result<Self, ProvenanceError> {
        let mut chains: BTreeMap<String, Vec<ProvenanceSnapshot>> = BTreeMap::new();
        for (i, line) in source.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let snapshot: ProvenanceSnapshot =
                serde_json::from_str(&line).map_err(|source| ProvenanceError::Json { line: i as u64 + 1, source })?;
            chains.entry(snapshot.entity_id.clone()).or_default().push(snapshot);
        }
        for chain in chains.values_mut() {
            chain.sort_by_key(|s| s.snapshot_number);
        }
        let ledger = ProvenanceLedger { chains };
        ledger.verify()?;
        Ok(ledger)
    }
}

fn verify_chain(entity: &str, chain: &[ProvenanceSnapshot]) -> Result<(), ProvenanceError> {
    let broken = |reason: String| ProvenanceError::BrokenChain { entity: entity.to_string(), reason };
    for (i, s) in chain.iter().enumerate() {
        if s.snapshot_number as usize != i + 1 {
            return Err(broken(format!("snapshot {} at position {}", s.snapshot_number, i + 1)));
        }
        if (i == 0) != (s.change_type == ChangeType::Creation) {
            return Err(broken(format!("snapshot {} has change type {:?}", i + 1, s.change_type)));
        }
        match chain.get(i + 1) {
            Some(next) if s.invalidated_at != Some(next.generated_at) => {
                return Err(broken(format!("snapshot {} not invalidated by its successor", i + 1)));
            }
            None if s.invalidated_at.is_some() => {
                return Err(broken("latest snapshot is invalidated".to_string()));
            }
            _ => {}
        }
        if s.invalidated_at.is_some_and(|t| t < s.generated_at) {
            return Err(broken(format!("snapshot {} invalidated before generation", i + 1)));
        }
    }
    Ok(())
}

/// Every entity of a freshly built index: its resource DOIs and citation OCIs.
pub fn index_entities(index: &CitationIndex) -> impl Iterator<Item = String> + '_ {
    index.resources().iter().map(|r| r.doi.to_string()).chain(index.records().map(|r| r.oci.to_string()))
}

/// Creation snapshots for every entity of the index.
pub fn populate_ledger(
    index: &CitationIndex,
    source: &str,
    agent: &str,
    at: DateTime<Utc>,
) -> Result<ProvenanceLedger, ProvenanceError> {
    let mut ledger = ProvenanceLedger::new();
    for entity in index_entities(index) {
        ledger.record_creation(&entity, source, agent, at)?;
    }
    Ok(ledger)
}

/// Streams creation snapshots for every entity without holding a ledger in memory.
pub fn write_creation_snapshots<W: Write>(
    index: &CitationIndex,
    source: &str,
    agent: &str,
    at: DateTime<Utc>,
    mut sink: W,
) -> io::Result<u64> {
    let mut n = 0;
    for entity in index_entities(index) {
        serde_json::to_writer(&mut sink, &ProvenanceSnapshot::creation(&entity, source, agent, at))?;
        sink.write_all(b"\n")?;
        n += 1;
    }
    sink.flush()?;
    Ok(n)
}
