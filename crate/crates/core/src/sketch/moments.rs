use serde::{Deserialize, Serialize};

use crate::descriptors::{Detail, Exclusion, StrengthValue};
use crate::math::{self, ExactSum};

/// Count and raw power sums `S1..S4` of a column, plus its range.
///
/// Sums are held exactly, so merging sketches of disjoint row sets yields
/// the same sums as sketching the union.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSketch {
    count: u64,
    sums: [ExactSum; 4],
    min: f64,
    max: f64,
}

impl Default for MomentSketch {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentMetrics {
    pub mean: f64,
    pub std_dev: f64,
    pub skewness: Option<f64>,
    pub kurtosis: Option<f64>,
}

impl MomentSketch {
    pub fn new() -> Self {
        Self {
            count: 0,
            sums: Default::default(),
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        }
    }

    pub fn from_parts(count: u64, sums: [ExactSum; 4], min: f64, max: f64) -> Self {
        Self { count, sums, min, max }
    }

    pub fn push(&mut self, v: f64) {
        let v2 = v * v;
        self.sums[0].add(v);
        self.sums[1].add(v2);
        self.sums[2].add(v2 * v);
        self.sums[3].add(v2 * v2);
        self.count += 1;
        self.min = self.min.min(v);
        self.max = self.max.max(v);
    }

    pub fn merge(&mut self, other: &MomentSketch) {
        for (a, b) in self.sums.iter_mut().zip(&other.sums) {
            a.merge(b);
        }
        self.count += other.count;
        self.min = self.min.min(other.min);
        self.max = self.max.max(other.max);
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// `S_p = sum b_i^p` for `p` in 1..=4.
    pub fn power_sum(&self, p: usize) -> f64 {
        self.sums[p - 1].value()
    }

    pub fn exact_sums(&self) -> &[ExactSum; 4] {
        &self.sums
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn is_constant(&self) -> bool {
        self.count > 0 && self.min == self.max
    }

    pub fn mean(&self) -> f64 {
        self.power_sum(1) / self.count as f64
    }

    /// Mean, population standard deviation, skewness and kurtosis
    /// reconstructed from the raw power sums.
    pub fn metrics(&self) -> Option<MomentMetrics> {
        if self.count == 0 {
            return None;
        }
        let n = self.count as f64;
        let mean = self.power_sum(1) / n;
        let e2 = self.power_sum(2) / n;
        let e3 = self.power_sum(3) / n;
        let e4 = self.power_sum(4) / n;
        let mu2 = mean * mean;
        let m2 = (e2 - mu2).max(0.0);
        let std_dev = math::sqrt(m2);
        if self.is_constant() || m2 == 0.0 {
            return Some(MomentMetrics { mean, std_dev: 0.0, skewness: None, kurtosis: None });
        }
        let m3 = e3 - 3.0 * mean * e2 + 2.0 * mu2 * mean;
        let m4 = e4 - 4.0 * mean * e3 + 6.0 * mu2 * e2 - 3.0 * mu2 * mu2;
        Some(MomentMetrics {
            mean,
            std_dev,
            skewness: Some(m3 / (m2 * std_dev)),
            kurtosis: Some(m4 / (m2 * m2)),
        })
    }

    pub fn skewness(&self) -> Result<StrengthValue, Exclusion> {
        let m = self.metrics().ok_or(Exclusion::TooFewValues)?;
        let g1 = m.skewness.ok_or(Exclusion::Constant)?;
        Ok(StrengthValue {
            raw: g1,
            strength: g1.abs(),
            detail: Detail::Moments { n: self.count, mean: m.mean, std_dev: m.std_dev },
        })
    }

    pub fn kurtosis(&self) -> Result<StrengthValue, Exclusion> {
        let m = self.metrics().ok_or(Exclusion::TooFewValues)?;
        let k = m.kurtosis.ok_or(Exclusion::Constant)?;
        Ok(StrengthValue {
            raw: k,
            strength: k,
            detail: Detail::Moments { n: self.count, mean: m.mean, std_dev: m.std_dev },
        })
    }
}

impl FromIterator<f64> for MomentSketch {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::new();
        iter.into_iter().for_each(|v| s.push(v));
        s
    }
}
