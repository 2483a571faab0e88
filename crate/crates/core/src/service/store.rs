//! On-disk layout.
//!
//! A resource store (written by `ingest`) holds:
//!
//! * `resources.jsonl`: normalized, merged resources sorted by DOI
//! * `ingest_report.json`: the ingestion report and input sources
//!
//! An index directory (written by `build`) holds:
//!
//! * `resources.jsonl`: the resources the index was built from
//! * `citations.csv`: the CSV export
//! * `provenance.jsonl`: one creation snapshot per resource and citation
//! * `manifest.json`: counts, license and build provenance
//!
//! Loading an index re-derives the citation set from `resources.jsonl`; the
//! build is deterministic so the result matches the exported files.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use super::ServiceError;
use crate::index::{build_index, write_csv, BuildReport, CitationIndex};
use crate::ingestion::{BibResource, IngestReport};
use crate::metrics::{corpus_stats, CorpusStats};
use crate::provenance::{write_creation_snapshots, ProvenanceLedger};
use crate::LICENSE;

pub const RESOURCES_FILE: &str = "resources.jsonl";
pub const INGEST_REPORT_FILE: &str = "ingest_report.json";
pub const CITATIONS_FILE: &str = "citations.csv";
pub const PROVENANCE_FILE: &str = "provenance.jsonl";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoreReport {
    pub sources: Vec<String>,
    pub report: IngestReport,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub license: String,
    pub built_at: String,
    pub agent: String,
    pub source: String,
    pub build: BuildReport,
    pub provenance_snapshots: u64,
}

pub fn write_resources(path: &Path, resources: &[BibResource]) -> Result<(), ServiceError> {
    let file = File::create(path).map_err(ServiceError::io(path))?;
    let mut out = BufWriter::new(file);
    for r in resources {
        serde_json::to_writer(&mut out, r).map_err(|e| ServiceError::io(path)(e.into()))?;
        out.write_all(b"\n").map_err(ServiceError::io(path))?;
    }
    out.flush().map_err(ServiceError::io(path))
}

pub fn read_resources(path: &Path) -> Result<Vec<BibResource>, ServiceError> {
    let file = File::open(path).map_err(ServiceError::io(path))?;
    let mut resources = Vec::new();
    for (i, line) in BufReader::with_capacity(1 << 20, file).lines().enumerate() {
        let line = line.map_err(ServiceError::io(path))?;
        if line.is_empty() {
            continue;
        }
        let r = serde_json::from_str(&line).map_err(|e| ServiceError::CorruptStore {
            path: path.to_path_buf(),
            line: i as u64 + 1,
            message: e.to_string(),
        })?;
        resources.push(r);
    }
    Ok(resources)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), ServiceError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    fs::write(path, text).map_err(ServiceError::io(path))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, ServiceError> {
    let text = fs::read_to_string(path).map_err(ServiceError::io(path))?;
    serde_json::from_str(&text).map_err(|e| ServiceError::CorruptStore {
        path: path.to_path_buf(),
        line: e.line() as u64,
        message: e.to_string(),
    })
}

/// Writes a resource store directory.
pub fn write_store(dir: &Path, resources: &[BibResource], report: &StoreReport) -> Result<(), ServiceError> {
    fs::create_dir_all(dir).map_err(ServiceError::io(dir))?;
    write_resources(&dir.join(RESOURCES_FILE), resources)?;
    write_json(&dir.join(INGEST_REPORT_FILE), report)
}

pub fn read_store_report(dir: &Path) -> Result<StoreReport, ServiceError> {
    read_json(&dir.join(INGEST_REPORT_FILE))
}

#[derive(Debug, Clone)]
pub struct IndexDir {
    path: PathBuf,
}

pub struct BuildOptions<'a> {
    pub agent: &'a str,
    pub source: &'a str,
    pub at: DateTime<Utc>,
}

impl IndexDir {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        IndexDir { path: path.into() }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn file(&self, name: &str) -> PathBuf {
        self.path.join(name)
    }

    /// Builds the index from `resources` and writes every index file.
    pub fn build(&self, resources: Vec<BibResource>, opts: &BuildOptions<'_>) -> Result<LoadedIndex, ServiceError> {
        fs::create_dir_all(&self.path).map_err(ServiceError::io(&self.path))?;
        write_resources(&self.file(RESOURCES_FILE), &resources)?;
        let index = build_index(resources)?;

        let csv_path = self.file(CITATIONS_FILE);
        let csv = File::create(&csv_path).map_err(ServiceError::io(&csv_path))?;
        write_csv(&index, BufWriter::new(csv)).map_err(ServiceError::io(&csv_path))?;

        let prov_path = self.file(PROVENANCE_FILE);
        let prov = File::create(&prov_path).map_err(ServiceError::io(&prov_path))?;
        let snapshots = write_creation_snapshots(&index, opts.source, opts.agent, opts.at, BufWriter::new(prov))
            .map_err(ServiceError::io(&prov_path))?;

        let manifest = Manifest {
            license: LICENSE.to_string(),
            built_at: opts.at.to_rfc3339_opts(SecondsFormat::Secs, true),
            agent: opts.agent.to_string(),
            source: opts.source.to_string(),
            build: index.report().clone(),
            provenance_snapshots: snapshots,
        };
        write_json(&self.file(MANIFEST_FILE), &manifest)?;
        Ok(LoadedIndex::new(index, manifest))
    }

    pub fn manifest(&self) -> Result<Manifest, ServiceError> {
        read_json(&self.file(MANIFEST_FILE))
    }

    /// Loads a built index directory.
    pub fn load(&self) -> Result<LoadedIndex, ServiceError> {
        let manifest = self.manifest()?;
        let index = build_index(read_resources(&self.file(RESOURCES_FILE))?)?;
        if index.report() != &manifest.build {
            return Err(ServiceError::CorruptStore {
                path: self.file(MANIFEST_FILE),
                line: 0,
                message: "index contents do not match manifest counts".to_string(),
            });
        }
        Ok(LoadedIndex::new(index, manifest))
    }

    pub fn provenance(&self) -> Result<ProvenanceLedger, ServiceError> {
        let path = self.file(PROVENANCE_FILE);
        let file = File::open(&path).map_err(ServiceError::io(&path))?;
        Ok(ProvenanceLedger::read_jsonl(BufReader::new(file))?)
    }
}

/// A built index with its precomputed statistics, shared read-only.
pub struct LoadedIndex {
    pub index: CitationIndex,
    pub stats: CorpusStats,
    pub manifest: Manifest,
}

impl std::fmt::Debug for LoadedIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LoadedIndex")
            .field("citations", &self.index.len())
            .field("resources", &self.index.resources().len())
            .field("manifest", &self.manifest)
            .finish()
    }
}

impl LoadedIndex {
    pub fn new(index: CitationIndex, manifest: Manifest) -> Self {
        let stats = corpus_stats(&index);
        LoadedIndex { index, stats, manifest }
    }

    /// In-memory index without files, stamped with a fixed manifest.
    pub fn from_index(index: CitationIndex) -> Self {
        let manifest = Manifest {
            license: LICENSE.to_string(),
            built_at: String::new(),
            agent: String::new(),
            source: String::new(),
            build: index.report().clone(),
            provenance_snapshots: 0,
        };
        LoadedIndex::new(index, manifest)
    }
}
