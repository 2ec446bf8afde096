//! File formats, the dataset registry, the HTTP service and the command
//! line front end for guidepost exploration. All statistics live in
//! `guidepost-core`; this crate moves bytes around them.

pub mod build;
pub mod cli;
pub mod codec;
pub mod ingest;
pub mod params;
pub mod registry;
pub mod render;
pub mod service;

use std::io;

use guidepost_core::sketch::ConfigError;
use guidepost_core::{EngineError, TableError};

pub use build::build_bundle_parallel;
pub use codec::{decode_bundle, encode_bundle, FormatError};
pub use ingest::{ingest_csv, IngestOptions};
pub use registry::{DatasetMeta, Registry};
pub use render::to_json;

/// Default upload cap: 1 GiB.
pub const DEFAULT_MAX_UPLOAD_BYTES: usize = 1 << 30;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unreadable source: {0}")]
    Unreadable(String),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("unknown dataset {0}")]
    UnknownDataset(String),
    #[error("unknown session {0}")]
    UnknownSession(String),
    #[error("corrupt session: {0}")]
    CorruptSession(String),
    #[error("corrupt registry: {0}")]
    Corrupt(String),
    #[error("no sketch bundle for dataset {0}; run `guidepost sketch {0}`")]
    NoBundle(String),
    #[error("dataset exceeds the configured size cap of {cap} bytes")]
    TooLarge { cap: usize },
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("invalid json: {0}")]
    Json(#[from] serde_json::Error),
}
