//! The guidepost query model: instance sets, ranked guideposts,
//! neighbourhoods of a focused guidepost, overview matrices and sessions.

mod explorer;
mod instances;
mod query;
mod session;

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::descriptors::{ChartType, DescriptorKind, Exclusion, StrengthValue};
use crate::payload::VisualizationPayload;
use crate::table::DatasetId;

pub use explorer::Explorer;
pub use instances::{enumerate_instances, Instance, InstanceSet};
pub use query::{GuidepostQuery, Metric, Mode, QuerySettings, Tuple, DEFAULT_ALPHA};
pub use session::{Bookmark, SessionState, SESSION_VERSION};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EngineError {
    #[error("invalid filter range")]
    InvalidFilterRange,
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("unknown guidepost id {0}")]
    UnknownGuidepost(String),
    #[error("bundle building")]
    BundleNotReady,
    #[error("stale bundle fingerprint")]
    StaleBundle,
    #[error("focus tuple no longer admissible: {0}")]
    FocusNotAdmissible(Exclusion),
    #[error("exact overview refused for {columns} columns (limit {limit}); use approximate mode")]
    OverviewTooLarge { columns: usize, limit: usize },
    #[error("session belongs to dataset {0}")]
    SessionDataset(String),
    #[error("unsupported session version {0}")]
    SessionVersion(u32),
}

/// Payload sizes and limits for query evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EngineConfig {
    pub histogram_bins: usize,
    pub scatter_points: usize,
    pub pareto_bars: usize,
    /// Outlier values listed in a box plot.
    pub outlier_values: usize,
    /// Widest instance domain served by an exact overview.
    pub exact_overview_columns: usize,
    /// Seed for exact-mode scatter down-sampling.
    pub sample_seed: u64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            histogram_bins: 20,
            scatter_points: 1000,
            pareto_bars: 50,
            outlier_values: 1000,
            exact_overview_columns: 200,
            sample_seed: 42,
        }
    }
}

/// A ranked descriptor instance with its chart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Guidepost {
    pub id: String,
    pub descriptor: DescriptorKind,
    pub tuple: Tuple,
    pub columns: Vec<String>,
    pub metric: Metric,
    pub value: StrengthValue,
    pub chart: ChartType,
    pub payload: VisualizationPayload,
    pub approximate: bool,
}

/// Guideposts near a focused one. `fixed_first` keeps the focus's first
/// attribute, `fixed_second` its second, and `combined` ranks the union.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborhoodResult {
    pub focus: String,
    pub focus_tuple: Tuple,
    pub fixed_first: Vec<Guidepost>,
    pub fixed_second: Vec<Guidepost>,
    pub combined: Vec<Guidepost>,
}

/// Strengths over a whole instance set; `None` marks excluded instances
/// and the diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Overview {
    Vector {
        descriptor: DescriptorKind,
        mode: Mode,
        columns: Vec<usize>,
        names: Vec<String>,
        strengths: Vec<Option<f64>>,
    },
    Matrix {
        descriptor: DescriptorKind,
        mode: Mode,
        columns: Vec<usize>,
        names: Vec<String>,
        strengths: Vec<Vec<Option<f64>>>,
    },
}

/// Stable id of a descriptor instance: 16 hex digits of
/// `SHA-256(dataset id, descriptor, tuple)`.
pub fn guidepost_id(dataset: &DatasetId, descriptor: DescriptorKind, tuple: &Tuple) -> String {
    let mut h = Sha256::new();
    h.update(b"guidepost-v1\0");
    h.update(dataset.as_str().as_bytes());
    h.update([0u8]);
    h.update(descriptor.name().as_bytes());
    h.update([0u8]);
    for &i in tuple.indices() {
        h.update((i as u64).to_le_bytes());
    }
    crate::table::hex(&h.finalize()[..8])
}
