//! Single-pass, mergeable column synopses and the rules that turn them into
//! approximate strength metrics.

mod bundle;
pub mod estimate;
pub mod frequent;
pub mod hyperplane;
pub mod moments;
pub mod quantiles;
pub mod reservoir;

use serde::{Deserialize, Serialize};

pub use bundle::{
    build_bundle, build_bundle_at, finish_bundle, hyperplane_inputs, resolve_config, sketch_column, CategoricalSketch,
    ColumnSketch, DistinctSketch, IntegerFrequencies, NumericSketch, SketchBundle,
};
pub use frequent::MisraGries;
pub use hyperplane::{approx_pearson, HyperplaneSketch};
pub use moments::{MomentMetrics, MomentSketch};
pub use quantiles::{QuantileSketch, QuantileView};
pub use reservoir::{ReservoirBuilder, ReservoirSample};

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum SketchError {
    #[error("incomparable sketches")]
    Incomparable,
    #[error("empty sketch")]
    Empty,
    #[error("corrupt sketch: {0}")]
    Corrupt(&'static str),
    #[error("bundle does not match dataset")]
    Stale,
}

/// Build parameters shared by every column of a bundle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SketchConfig {
    /// Hyperplane count; a positive multiple of 64.
    pub k: usize,
    pub seed: u64,
    /// Quantile rank-error bound as a fraction of the column length.
    pub epsilon: f64,
    /// Frequent-items counters.
    pub s: usize,
    /// Reservoir size.
    pub r: usize,
    /// Distinct values counted exactly up to this many.
    pub cardinality_cap: usize,
    /// Longest column the quantile error bound must hold for. `None` uses
    /// the dataset's row count; partitions that will be merged must agree.
    #[serde(default)]
    pub max_rows: Option<u64>,
}

impl Default for SketchConfig {
    fn default() -> Self {
        Self { k: 1024, seed: 42, epsilon: 0.005, s: 256, r: 4096, cardinality_cap: 10_000, max_rows: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid sketch configuration: {0}")]
pub struct ConfigError(pub &'static str);

impl SketchConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.k == 0 || self.k % hyperplane::WORD_BITS != 0 {
            return Err(ConfigError("k must be a positive multiple of 64"));
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 0.1) {
            return Err(ConfigError("epsilon must be in (0, 0.1]"));
        }
        if self.s == 0 || self.r == 0 || self.cardinality_cap == 0 {
            return Err(ConfigError("s, r and the cardinality cap must be positive"));
        }
        if self.max_rows == Some(0) {
            return Err(ConfigError("max_rows must be positive"));
        }
        Ok(())
    }

    pub(crate) fn quantile_capacity(&self, rows: u64) -> usize {
        quantiles::capacity_for(self.epsilon, self.max_rows.unwrap_or(rows).max(1))
    }
}
