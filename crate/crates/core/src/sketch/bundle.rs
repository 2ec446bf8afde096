use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use crate::math::mix64;
use crate::sketch::frequent::MisraGries;
use crate::sketch::hyperplane::{self, HyperplaneInput, HyperplaneSketch};
use crate::sketch::moments::MomentSketch;
use crate::sketch::quantiles::QuantileSketch;
use crate::sketch::reservoir::{ReservoirBuilder, ReservoirSample};
use crate::sketch::{ConfigError, SketchConfig, SketchError};
use crate::table::{Column, ColumnData, Dataset, DatasetId};

/// Distinct-value counter: exact up to `cap` values, then only "more than
/// `cap`". Values are stored as 64-bit hashes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistinctSketch {
    cap: usize,
    /// `None` once more than `cap` distinct values were seen.
    hashes: Option<BTreeSet<u64>>,
}

impl DistinctSketch {
    pub fn new(cap: usize) -> Self {
        Self { cap, hashes: Some(BTreeSet::new()) }
    }

    pub fn from_parts(cap: usize, hashes: Option<Vec<u64>>) -> Result<Self, SketchError> {
        if let Some(h) = &hashes {
            if h.len() > cap {
                return Err(SketchError::Corrupt("distinct set above cap"));
            }
        }
        Ok(Self { cap, hashes: hashes.map(|h| h.into_iter().collect()) })
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn hashes(&self) -> Option<impl Iterator<Item = u64> + '_> {
        self.hashes.as_ref().map(|h| h.iter().copied())
    }

    pub fn insert(&mut self, hash: u64) {
        if let Some(set) = &mut self.hashes {
            set.insert(hash);
            if set.len() > self.cap {
                self.hashes = None;
            }
        }
    }

    /// Exact distinct count, if it is within the cap.
    pub fn exact(&self) -> Option<u64> {
        self.hashes.as_ref().map(|h| h.len() as u64)
    }

    pub fn merge(&mut self, other: &DistinctSketch) -> Result<(), SketchError> {
        if self.cap != other.cap {
            return Err(SketchError::Incomparable);
        }
        match &other.hashes {
            None => self.hashes = None,
            Some(h) => h.iter().for_each(|&x| self.insert(x)),
        }
        Ok(())
    }
}

pub(crate) fn hash_label(label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    mix64(h ^ label.len() as u64)
}

pub(crate) fn hash_integer(v: i64) -> u64 {
    mix64(v as u64 ^ 0x6a09_e667_f3bc_c909)
}

/// Value frequencies of an integer-valued numeric column.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegerFrequencies {
    pub heavy: MisraGries<i64>,
    pub distinct: DistinctSketch,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NumericSketch {
    pub moments: MomentSketch,
    pub quantiles: QuantileSketch,
    pub reservoir: ReservoirSample<f64>,
    pub hyperplane: Option<HyperplaneSketch>,
    /// Present only while every value seen is an integer.
    pub frequencies: Option<IntegerFrequencies>,
}

impl NumericSketch {
    /// Hyperplane signature; constant columns have none.
    pub fn signature(&self) -> Option<&HyperplaneSketch> {
        if self.moments.is_constant() {
            None
        } else {
            self.hyperplane.as_ref()
        }
    }

    pub fn count(&self) -> u64 {
        self.moments.count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CategoricalSketch {
    pub count: u64,
    pub heavy: MisraGries<String>,
    pub distinct: DistinctSketch,
    pub reservoir: ReservoirSample<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnSketch {
    /// No present cells.
    Absent,
    Numeric(Box<NumericSketch>),
    Categorical(Box<CategoricalSketch>),
}

impl ColumnSketch {
    pub fn numeric(&self) -> Option<&NumericSketch> {
        match self {
            ColumnSketch::Numeric(s) => Some(s),
            _ => None,
        }
    }

    pub fn categorical(&self) -> Option<&CategoricalSketch> {
        match self {
            ColumnSketch::Categorical(s) => Some(s),
            _ => None,
        }
    }

    pub fn merge(&self, other: &ColumnSketch) -> Result<ColumnSketch, SketchError> {
        Ok(match (self, other) {
            (ColumnSketch::Absent, x) | (x, ColumnSketch::Absent) => x.clone(),
            (ColumnSketch::Numeric(a), ColumnSketch::Numeric(b)) => {
                let mut moments = a.moments.clone();
                moments.merge(&b.moments);
                let mut quantiles = a.quantiles.clone();
                quantiles.merge(&b.quantiles)?;
                let reservoir = a.reservoir.merge(&b.reservoir)?;
                let hyperplane = match (&a.hyperplane, &b.hyperplane) {
                    (Some(x), Some(y)) => Some(x.merge(y, moments.mean())?),
                    _ => None,
                };
                let frequencies = match (&a.frequencies, &b.frequencies) {
                    (Some(x), Some(y)) => {
                        let mut heavy = x.heavy.clone();
                        heavy.merge(&y.heavy)?;
                        let mut distinct = x.distinct.clone();
                        distinct.merge(&y.distinct)?;
                        Some(IntegerFrequencies { heavy, distinct })
                    }
                    _ => None,
                };
                ColumnSketch::Numeric(Box::new(NumericSketch { moments, quantiles, reservoir, hyperplane, frequencies }))
            }
            (ColumnSketch::Categorical(a), ColumnSketch::Categorical(b)) => {
                let mut heavy = a.heavy.clone();
                heavy.merge(&b.heavy)?;
                let mut distinct = a.distinct.clone();
                distinct.merge(&b.distinct)?;
                ColumnSketch::Categorical(Box::new(CategoricalSketch {
                    count: a.count + b.count,
                    heavy,
                    distinct,
                    reservoir: a.reservoir.merge(&b.reservoir)?,
                }))
            }
            _ => return Err(SketchError::Incomparable),
        })
    }
}

/// Per-column synopses of one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct SketchBundle {
    config: SketchConfig,
    fingerprint: DatasetId,
    rows: u64,
    columns: Vec<ColumnSketch>,
}

impl SketchBundle {
    pub fn from_parts(
        config: SketchConfig,
        fingerprint: DatasetId,
        rows: u64,
        columns: Vec<ColumnSketch>,
    ) -> Result<Self, SketchError> {
        config.validate().map_err(|_| SketchError::Corrupt("configuration"))?;
        Ok(Self { config, fingerprint, rows, columns })
    }

    /// Configuration with `max_rows` resolved.
    pub fn config(&self) -> &SketchConfig {
        &self.config
    }

    pub fn fingerprint(&self) -> &DatasetId {
        &self.fingerprint
    }

    pub fn rows(&self) -> u64 {
        self.rows
    }

    pub fn columns(&self) -> &[ColumnSketch] {
        &self.columns
    }

    pub fn column(&self, index: usize) -> Option<&ColumnSketch> {
        self.columns.get(index)
    }

    pub fn matches(&self, dataset: &Dataset) -> bool {
        &self.fingerprint == dataset.id() && self.columns.len() == dataset.d() && self.rows == dataset.n() as u64
    }

    /// Bundle of the concatenation of two row partitions (`self` first).
    /// The result is labelled with `fingerprint`.
    pub fn merge(&self, other: &SketchBundle, fingerprint: DatasetId) -> Result<SketchBundle, SketchError> {
        if self.config != other.config || self.columns.len() != other.columns.len() {
            return Err(SketchError::Incomparable);
        }
        let columns = self
            .columns
            .iter()
            .zip(&other.columns)
            .map(|(a, b)| a.merge(b))
            .collect::<Result<_, _>>()?;
        Ok(SketchBundle { config: self.config, fingerprint, rows: self.rows + other.rows, columns })
    }
}

/// First pass over one column: everything except the hyperplane signature.
/// Row `i` of the column is global row `row_offset + i`.
pub fn sketch_column(column: &Column, config: &SketchConfig, row_offset: u64) -> ColumnSketch {
    let rows = column.data.len() as u64;
    match &column.data {
        ColumnData::Numeric(col) => {
            let mut moments = MomentSketch::new();
            let mut quantiles = QuantileSketch::with_capacity(config.epsilon, config.quantile_capacity(rows));
            let mut reservoir = ReservoirBuilder::new(config.r, config.seed);
            let integer = col.is_integer_valued();
            let mut heavy = MisraGries::new(config.s);
            let mut distinct = DistinctSketch::new(config.cardinality_cap);
            for (row, v) in col.present_with_rows() {
                moments.push(v);
                quantiles.push(v);
                reservoir.offer(row_offset + row as u64, v);
                if integer {
                    let key = v as i64;
                    heavy.update(key);
                    distinct.insert(hash_integer(key));
                }
            }
            if moments.count() == 0 {
                return ColumnSketch::Absent;
            }
            ColumnSketch::Numeric(Box::new(NumericSketch {
                moments,
                quantiles,
                reservoir: reservoir.finish(),
                hyperplane: None,
                frequencies: integer.then_some(IntegerFrequencies { heavy, distinct }),
            }))
        }
        ColumnData::Categorical(col) => {
            let mut heavy = MisraGries::new(config.s);
            let mut reservoir = ReservoirBuilder::new(config.r, config.seed);
            let mut count = 0u64;
            for (row, &code) in col.codes().iter().enumerate() {
                if code == crate::table::MISSING_CODE {
                    continue;
                }
                count += 1;
                heavy.update(code);
                reservoir.offer(row_offset + row as u64, code);
            }
            if count == 0 {
                return ColumnSketch::Absent;
            }
            let mut distinct = DistinctSketch::new(config.cardinality_cap);
            for (code, &c) in col.counts().iter().enumerate() {
                if c > 0 {
                    distinct.insert(hash_label(col.label(code as u32)));
                }
            }
            let counters = heavy.counters().map(|(&code, c)| (String::from(col.label(code)), c)).collect();
            let heavy = MisraGries::from_parts(config.s, counters, heavy.count(), heavy.error_bound())
                .expect("relabelled summary keeps its shape");
            let sample = reservoir.finish();
            let entries = sample.entries().iter().map(|&(row, code)| (row, String::from(col.label(code)))).collect();
            let reservoir = ReservoirSample::from_parts(config.r, config.seed, sample.seen(), entries)
                .expect("relabelled sample keeps its shape");
            ColumnSketch::Categorical(Box::new(CategoricalSketch { count, heavy, distinct, reservoir }))
        }
    }
}

/// Projection inputs for every numeric column that has a first-pass sketch,
/// with the column indices they belong to.
pub fn hyperplane_inputs<'a>(dataset: &'a Dataset, columns: &[ColumnSketch]) -> (Vec<usize>, Vec<HyperplaneInput<'a>>) {
    let mut indices = Vec::new();
    let mut inputs = Vec::new();
    for (i, sketch) in columns.iter().enumerate() {
        let (Some(s), Some(col)) = (sketch.numeric(), dataset.numeric(i)) else {
            continue;
        };
        indices.push(i);
        inputs.push(HyperplaneInput {
            values: col.raw(),
            present: col.mask(),
            mean: s.moments.mean(),
            complete: col.missing_count() == 0,
        });
    }
    (indices, inputs)
}

/// Resolves `max_rows` against the dataset and validates the result.
pub fn resolve_config(dataset: &Dataset, config: &SketchConfig) -> Result<SketchConfig, ConfigError> {
    config.validate()?;
    Ok(SketchConfig { max_rows: Some(config.max_rows.unwrap_or(dataset.n() as u64)), ..*config })
}

/// Attaches signatures (aligned with `indices`) and seals the bundle.
pub fn finish_bundle(
    dataset: &Dataset,
    config: SketchConfig,
    mut columns: Vec<ColumnSketch>,
    indices: &[usize],
    signatures: Vec<HyperplaneSketch>,
) -> SketchBundle {
    for (&i, sig) in indices.iter().zip(signatures) {
        if let ColumnSketch::Numeric(s) = &mut columns[i] {
            s.hyperplane = Some(sig);
        }
    }
    SketchBundle { config, fingerprint: dataset.id().clone(), rows: dataset.n() as u64, columns }
}

pub fn build_bundle(dataset: &Dataset, config: &SketchConfig) -> Result<SketchBundle, ConfigError> {
    build_bundle_at(dataset, config, 0)
}

/// Builds a bundle for a dataset whose first row is global row `row_offset`
/// of some larger table; partition bundles built this way merge.
pub fn build_bundle_at(dataset: &Dataset, config: &SketchConfig, row_offset: u64) -> Result<SketchBundle, ConfigError> {
    let config = resolve_config(dataset, config)?;
    let columns: Vec<ColumnSketch> = dataset.columns().iter().map(|c| sketch_column(c, &config, row_offset)).collect();
    let (indices, inputs) = hyperplane_inputs(dataset, &columns);
    let signatures = hyperplane::build_signatures(config.k, config.seed, row_offset, &inputs);
    Ok(finish_bundle(dataset, config, columns, &indices, signatures))
}
