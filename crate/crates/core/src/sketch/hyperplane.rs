//! Random-hyperplane signatures of mean-centred columns.
//!
//! Bit `j` of a column's signature is the sign of `sum_i g[j][i] (b_i - mu)`
//! with `g[j][i]` standard normal. The weights for a block of 64 hyperplanes
//! at one row come from a PCG stream keyed by `(seed, block, row)`, so every
//! column sees the same hyperplanes and no weight matrix is ever stored.
//!
//! Alongside the signs the sketch keeps the projections themselves and the
//! per-hyperplane sum of weights over present rows. Those two vectors let
//! partition sketches be re-centred on the merged mean and added.

use alloc::vec;
use alloc::vec::Vec;

use rand_distr::{Distribution, StandardNormal};
use rand_pcg::Pcg64Mcg;

use crate::math::{self, mix64};
use crate::sketch::SketchError;

pub const WORD_BITS: usize = 64;
const CHUNK_ROWS: usize = 512;

/// One column's data as seen by the projection pass.
#[derive(Debug, Clone, Copy)]
pub struct HyperplaneInput<'a> {
    pub values: &'a [f64],
    pub present: &'a [bool],
    pub mean: f64,
    /// All cells present; the weight sums are then shared between columns.
    pub complete: bool,
}

/// Projections of every input onto one block of 64 hyperplanes.
#[derive(Debug, Clone, PartialEq)]
pub struct WordProjection {
    pub projections: Vec<[f64; WORD_BITS]>,
    pub masses: Vec<[f64; WORD_BITS]>,
}

fn weight_stream(seed: u64, word: usize, row: u64) -> Pcg64Mcg {
    let hi = mix64(seed ^ mix64(word as u64 ^ 0xa076_1d64_78bd_642f));
    let lo = mix64(row ^ mix64(seed.wrapping_add(0xe703_7ed1_a0b4_28db)));
    Pcg64Mcg::new(((hi as u128) << 64) | lo as u128)
}

/// The 64 Gaussian weights of hyperplane block `word` at global row `row`.
pub fn weights(seed: u64, word: usize, row: u64) -> [f64; WORD_BITS] {
    let mut rng = weight_stream(seed, word, row);
    let mut g = [0.0; WORD_BITS];
    for x in g.iter_mut() {
        *x = StandardNormal.sample(&mut rng);
    }
    g
}

/// Projects every input onto hyperplane block `word`. Row `i` of each input
/// is global row `row_offset + i`.
pub fn project_word(seed: u64, word: usize, row_offset: u64, inputs: &[HyperplaneInput<'_>]) -> WordProjection {
    let rows = inputs.first().map_or(0, |c| c.values.len());
    debug_assert!(inputs.iter().all(|c| c.values.len() == rows && c.present.len() == rows));
    let mut projections = vec![[0.0; WORD_BITS]; inputs.len()];
    let mut masses = vec![[0.0; WORD_BITS]; inputs.len()];
    let mut shared = [0.0; WORD_BITS];
    let mut buf = vec![[0.0; WORD_BITS]; CHUNK_ROWS.min(rows)];
    let mut start = 0;
    while start < rows {
        let end = (start + CHUNK_ROWS).min(rows);
        let block = &mut buf[..end - start];
        for (i, g) in block.iter_mut().enumerate() {
            *g = weights(seed, word, row_offset + (start + i) as u64);
            for t in 0..WORD_BITS {
                shared[t] += g[t];
            }
        }
        for (c, input) in inputs.iter().enumerate() {
            let acc = &mut projections[c];
            let mass = &mut masses[c];
            for (i, g) in block.iter().enumerate() {
                let row = start + i;
                if !input.present[row] {
                    continue;
                }
                let x = input.values[row] - input.mean;
                for t in 0..WORD_BITS {
                    acc[t] += g[t] * x;
                }
                if !input.complete {
                    for t in 0..WORD_BITS {
                        mass[t] += g[t];
                    }
                }
            }
        }
        start = end;
    }
    for (c, input) in inputs.iter().enumerate() {
        if input.complete {
            masses[c] = shared;
        }
    }
    WordProjection { projections, masses }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HyperplaneSketch {
    k: usize,
    seed: u64,
    /// Mean the projections are centred on.
    mean: f64,
    projections: Vec<f64>,
    /// Sum of each hyperplane's weights over the present rows.
    masses: Vec<f64>,
    bits: Vec<u64>,
}

impl HyperplaneSketch {
    pub fn from_parts(
        k: usize,
        seed: u64,
        mean: f64,
        projections: Vec<f64>,
        masses: Vec<f64>,
    ) -> Result<Self, SketchError> {
        if k == 0 || k % WORD_BITS != 0 || projections.len() != k || masses.len() != k {
            return Err(SketchError::Corrupt("hyperplane shape"));
        }
        let bits = projections
            .chunks(WORD_BITS)
            .map(|w| {
                w.iter()
                    .enumerate()
                    .fold(0u64, |acc, (t, &p)| if p > 0.0 { acc | (1 << t) } else { acc })
            })
            .collect();
        Ok(Self { k, seed, mean, projections, masses, bits })
    }

    /// Assembles a column's sketch from its per-word projections.
    pub fn from_words(k: usize, seed: u64, mean: f64, words: &[([f64; WORD_BITS], [f64; WORD_BITS])]) -> Self {
        let projections = words.iter().flat_map(|(p, _)| p.iter().copied()).collect();
        let masses = words.iter().flat_map(|(_, m)| m.iter().copied()).collect();
        Self::from_parts(k, seed, mean, projections, masses).expect("word count matches k")
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn projections(&self) -> &[f64] {
        &self.projections
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn bits(&self) -> &[u64] {
        &self.bits
    }

    /// Number of hyperplanes separating the two columns.
    pub fn hamming(&self, other: &HyperplaneSketch) -> Result<u32, SketchError> {
        if self.k != other.k || self.seed != other.seed {
            return Err(SketchError::Incomparable);
        }
        Ok(self.bits.iter().zip(&other.bits).map(|(a, b)| (a ^ b).count_ones()).sum())
    }

    /// Sketch of the union of two row-disjoint partitions, re-centred on
    /// `mean`, the mean of the union.
    pub fn merge(&self, other: &HyperplaneSketch, mean: f64) -> Result<Self, SketchError> {
        if self.k != other.k || self.seed != other.seed {
            return Err(SketchError::Incomparable);
        }
        let shift_a = self.mean - mean;
        let shift_b = other.mean - mean;
        let projections = (0..self.k)
            .map(|j| {
                self.projections[j] + shift_a * self.masses[j] + other.projections[j] + shift_b * other.masses[j]
            })
            .collect();
        let masses = self.masses.iter().zip(&other.masses).map(|(a, b)| a + b).collect();
        Self::from_parts(self.k, self.seed, mean, projections, masses)
    }
}

/// Signed correlation estimate `cos(pi H / k)`.
pub fn approx_pearson(x: &HyperplaneSketch, y: &HyperplaneSketch) -> Result<f64, SketchError> {
    let h = x.hamming(y)?;
    Ok(math::cos(core::f64::consts::PI * h as f64 / x.k as f64))
}

/// Sequential signature build for a set of columns.
pub fn build_signatures(k: usize, seed: u64, row_offset: u64, inputs: &[HyperplaneInput<'_>]) -> Vec<HyperplaneSketch> {
    assert!(k > 0 && k % WORD_BITS == 0, "k must be a positive multiple of 64");
    let words: Vec<WordProjection> = (0..k / WORD_BITS).map(|w| project_word(seed, w, row_offset, inputs)).collect();
    assemble(k, seed, inputs, &words)
}

/// Joins per-word projections (in word order) into per-column sketches.
pub fn assemble(k: usize, seed: u64, inputs: &[HyperplaneInput<'_>], words: &[WordProjection]) -> Vec<HyperplaneSketch> {
    inputs
        .iter()
        .enumerate()
        .map(|(c, input)| {
            let per_word: Vec<_> = words.iter().map(|w| (w.projections[c], w.masses[c])).collect();
            HyperplaneSketch::from_words(k, seed, input.mean, &per_word)
        })
        .collect()
}
