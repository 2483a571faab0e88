//! Open DOI-to-DOI citation index.
//!
//! Bibliographic dumps are ingested as JSON Lines ([`ingestion`]), turned into
//! an immutable index in which every citation is an entity with its own OCI
//! ([`identifiers`], [`index`]), tracked in a provenance ledger
//! ([`provenance`]) and exported as CSV or N-Triples ([`rdf`]). The
//! [`service`] module exposes all of it through the `ocix` CLI and a read-only
//! HTTP API.

pub mod date;
pub mod identifiers;
pub mod index;
pub mod ingestion;
pub mod metrics;
pub mod provenance;
pub mod rdf;
pub mod service;

/// License of all exported data.
pub const LICENSE: &str = "CC0-1.0";

pub use date::{parse_partial_date, PartialDate, Precision};
pub use identifiers::{decode_oci, encode_oci, normalize_doi, Doi, Oci};
pub use index::{build_index, compute_timespan, CitationIndex, CitationRecord, SelfCitationType, TimeSpan};
pub use ingestion::{ingest_stream, BibResource, IngestReport};
