//! CLI and read-only HTTP API over a built index directory.

pub mod api;
pub mod cli;
pub mod http;
pub mod store;

use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::identifiers::IdentifierError;
use crate::index::IndexError;
use crate::ingestion::IngestError;
use crate::metrics::MetricsError;
use crate::provenance::ProvenanceError;

pub use api::{respond, ApiResponse, Endpoint, ResponseFormat};
pub use store::{IndexDir, LoadedIndex};

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error(transparent)]
    Identifier(#[from] IdentifierError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    Provenance(#[from] ProvenanceError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}:{line}: {message}")]
    CorruptStore { path: PathBuf, line: u64, message: String },
    #[error("cannot bind port {port}: {source}")]
    BindFailure {
        port: u16,
        #[source]
        source: io::Error,
    },
}

impl ServiceError {
    pub fn name(&self) -> &'static str {
        match self {
            ServiceError::Identifier(e) => e.name(),
            ServiceError::Ingest(e) => e.name(),
            ServiceError::Index(e) => e.name(),
            ServiceError::Provenance(e) => e.name(),
            ServiceError::Metrics(e) => e.name(),
            ServiceError::Io { .. } => "IoFailure",
            ServiceError::CorruptStore { .. } => "CorruptStore",
            ServiceError::BindFailure { .. } => "BindFailure",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(io::Error) -> ServiceError {
        let path = path.into();
        move |source| ServiceError::Io { path, source }
    }
}
