//! Guidepost recommendation core.
//!
//! Everything in this crate is pure computation over in-memory columns: typed
//! column storage, the six descriptor strength metrics and their chart
//! payloads, single-pass mergeable column sketches, and the guidepost query
//! model (ranking, neighborhoods, overviews, sessions). Parsing files,
//! persisting bundles and serving HTTP live in the `guidepost` crate.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![deny(rust_2018_idioms)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod descriptors;
pub mod engine;
pub mod math;
pub mod payload;
pub mod sketch;
pub mod table;

pub use descriptors::{ChartType, DescriptorKind, Detail, Exclusion, Order, StrengthValue};
pub use engine::{
    EngineConfig, EngineError, Explorer, Guidepost, GuidepostQuery, InstanceSet, Metric, Mode,
    NeighborhoodResult, Overview, QuerySettings, SessionState, Tuple,
};
pub use payload::VisualizationPayload;
pub use sketch::{SketchBundle, SketchConfig};
pub use table::{ColumnKind, ColumnMeta, Dataset, DatasetId, TableError};
