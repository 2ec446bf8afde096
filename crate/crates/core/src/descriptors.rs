//! The six statistical descriptors and their exact strength metrics.
//!
//! Every metric here works on the present (non-missing) cells of a column
//! and follows fixed conventions so exact and sketch-backed answers can be
//! compared:
//!
//! * quartiles use linear interpolation at position `(n - 1) q` of the
//!   sorted sample;
//! * moments use population normalisation (divide by `n`);
//! * a value exactly on a Tukey fence is an inlier;
//! * entropy uses natural logs and is normalised by `ln K`.

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::math;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DescriptorKind {
    Dispersion,
    Skew,
    HeavyTails,
    Outliers,
    HeterogeneousFrequencies,
    LinearRelationship,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartType {
    Histogram,
    BoxPlot,
    Pareto,
    Scatter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Order {
    #[serde(alias = "asc")]
    Ascending,
    #[serde(alias = "desc")]
    Descending,
}

impl Order {
    pub fn flipped(self) -> Self {
        match self {
            Order::Ascending => Order::Descending,
            Order::Descending => Order::Ascending,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Order::Ascending => "ascending",
            Order::Descending => "descending",
        }
    }
}

impl FromStr for Order {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "asc" | "ascending" => Ok(Order::Ascending),
            "desc" | "descending" => Ok(Order::Descending),
            _ => Err(UnknownName),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnknownName;

impl fmt::Display for UnknownName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("unknown name")
    }
}

impl DescriptorKind {
    /// Unary descriptors first, in carousel order.
    pub const ALL: [DescriptorKind; 6] = [
        DescriptorKind::Dispersion,
        DescriptorKind::Skew,
        DescriptorKind::HeavyTails,
        DescriptorKind::Outliers,
        DescriptorKind::HeterogeneousFrequencies,
        DescriptorKind::LinearRelationship,
    ];

    pub fn arity(self) -> usize {
        match self {
            DescriptorKind::LinearRelationship => 2,
            _ => 1,
        }
    }

    /// Dispersion is browsed as "low dispersion" first; everything else
    /// puts the largest strength first.
    pub fn default_order(self) -> Order {
        match self {
            DescriptorKind::Dispersion => Order::Ascending,
            _ => Order::Descending,
        }
    }

    pub fn chart(self) -> ChartType {
        match self {
            DescriptorKind::Dispersion | DescriptorKind::Skew | DescriptorKind::HeavyTails => {
                ChartType::Histogram
            }
            DescriptorKind::Outliers => ChartType::BoxPlot,
            DescriptorKind::HeterogeneousFrequencies => ChartType::Pareto,
            DescriptorKind::LinearRelationship => ChartType::Scatter,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DescriptorKind::Dispersion => "dispersion",
            DescriptorKind::Skew => "skew",
            DescriptorKind::HeavyTails => "heavy_tails",
            DescriptorKind::Outliers => "outliers",
            DescriptorKind::HeterogeneousFrequencies => "heterogeneous_frequencies",
            DescriptorKind::LinearRelationship => "linear_relationship",
        }
    }

    pub fn metric_name(self) -> &'static str {
        match self {
            DescriptorKind::Dispersion => "quartile_coefficient_of_dispersion",
            DescriptorKind::Skew => "abs_skewness",
            DescriptorKind::HeavyTails => "kurtosis",
            DescriptorKind::Outliers => "outlier_count",
            DescriptorKind::HeterogeneousFrequencies => "one_minus_normalized_entropy",
            DescriptorKind::LinearRelationship => "abs_pearson",
        }
    }
}

impl fmt::Display for DescriptorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DescriptorKind {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DescriptorKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or(UnknownName)
    }
}

/// Why an instance was left out of an instance set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[serde(rename_all = "snake_case")]
pub enum Exclusion {
    #[error("qcd undefined")]
    QcdUndefined,
    #[error("degenerate (constant column)")]
    Constant,
    #[error("degenerate (single category)")]
    SingleCategory,
    #[error("too few values")]
    TooFewValues,
    #[error("no sketch available")]
    NoSketch,
}

/// Metric-specific extras carried next to a strength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Detail {
    Quartiles {
        q1: f64,
        q3: f64,
    },
    Moments {
        n: u64,
        mean: f64,
        std_dev: f64,
    },
    Tukey {
        n: u64,
        min: f64,
        q1: f64,
        median: f64,
        q3: f64,
        max: f64,
        fence_low: f64,
        fence_high: f64,
        outlier_count: u64,
    },
    Entropy {
        n: u64,
        distinct: u64,
        entropy: f64,
        normalized: f64,
    },
    Correlation {
        n: u64,
        slope: f64,
        intercept: f64,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        p_value: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrengthValue {
    /// Signed or unadjusted value (e.g. skewness, Pearson rho).
    pub raw: f64,
    /// Value used for ranking and filtering.
    pub strength: f64,
    pub detail: Detail,
}

/// Sorts a copy of `values` ascending.
pub fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_unstable_by(f64::total_cmp);
    v
}

/// Linear-interpolation quantile of an ascending sample at position
/// `(n - 1) q`.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let pos = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = math::floor(pos) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Quartile coefficient of dispersion `(Q3 - Q1) / (Q3 + Q1)`.
pub fn qcd(values: &[f64]) -> Result<StrengthValue, Exclusion> {
    if values.len() < 2 {
        return Err(Exclusion::TooFewValues);
    }
    let s = sorted(values);
    qcd_from_quartiles(quantile_sorted(&s, 0.25), quantile_sorted(&s, 0.75))
}

pub fn qcd_from_quartiles(q1: f64, q3: f64) -> Result<StrengthValue, Exclusion> {
    let denom = q3 + q1;
    if denom == 0.0 {
        return Err(Exclusion::QcdUndefined);
    }
    // Equal negative quartiles give -0.0; adding +0.0 folds it to 0.0.
    let v = (q3 - q1) / denom + 0.0;
    if !v.is_finite() {
        return Err(Exclusion::QcdUndefined);
    }
    Ok(StrengthValue {
        raw: v,
        strength: v,
        detail: Detail::Quartiles { q1, q3 },
    })
}

struct Central {
    n: usize,
    mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

fn central_moments(values: &[f64]) -> Result<Central, Exclusion> {
    if values.is_empty() {
        return Err(Exclusion::TooFewValues);
    }
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if lo == hi {
        return Err(Exclusion::Constant);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &v in values {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    Ok(Central {
        n: values.len(),
        mean,
        m2: m2 / n,
        m3: m3 / n,
        m4: m4 / n,
    })
}

/// Standardised skewness; ranks by magnitude.
pub fn skewness(values: &[f64]) -> Result<StrengthValue, Exclusion> {
    let c = central_moments(values)?;
    let sd = math::sqrt(c.m2);
    let g1 = c.m3 / (c.m2 * sd);
    Ok(StrengthValue {
        raw: g1,
        strength: g1.abs(),
        detail: Detail::Moments { n: c.n as u64, mean: c.mean, std_dev: sd },
    })
}

/// Non-excess kurtosis (a normal sample is near 3).
pub fn kurtosis(values: &[f64]) -> Result<StrengthValue, Exclusion> {
    let c = central_moments(values)?;
    let k = c.m4 / (c.m2 * c.m2);
    Ok(StrengthValue {
        raw: k,
        strength: k,
        detail: Detail::Moments { n: c.n as u64, mean: c.mean, std_dev: math::sqrt(c.m2) },
    })
}

/// Five-number summary plus Tukey fences.
#[derive(Debug, Clone, PartialEq)]
pub struct TukeySummary {
    pub n: u64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub fence_low: f64,
    pub fence_high: f64,
}

impl TukeySummary {
    pub fn from_quartiles(n: u64, min: f64, q1: f64, median: f64, q3: f64, max: f64) -> Self {
        let iqr = q3 - q1;
        Self {
            n,
            min,
            q1,
            median,
            q3,
            max,
            fence_low: q1 - 1.5 * iqr,
            fence_high: q3 + 1.5 * iqr,
        }
    }

    pub fn from_sorted(sorted: &[f64]) -> Self {
        Self::from_quartiles(
            sorted.len() as u64,
            sorted[0],
            quantile_sorted(sorted, 0.25),
            quantile_sorted(sorted, 0.5),
            quantile_sorted(sorted, 0.75),
            sorted[sorted.len() - 1],
        )
    }

    pub fn is_outlier(&self, v: f64) -> bool {
        v < self.fence_low || v > self.fence_high
    }

    pub fn strength(&self, outlier_count: u64) -> StrengthValue {
        StrengthValue {
            raw: outlier_count as f64,
            strength: outlier_count as f64,
            detail: Detail::Tukey {
                n: self.n,
                min: self.min,
                q1: self.q1,
                median: self.median,
                q3: self.q3,
                max: self.max,
                fence_low: self.fence_low,
                fence_high: self.fence_high,
                outlier_count,
            },
        }
    }
}

/// Number of values strictly outside the Tukey fences.
pub fn tukey_outliers(values: &[f64]) -> Result<StrengthValue, Exclusion> {
    if values.len() < 4 {
        return Err(Exclusion::TooFewValues);
    }
    let s = sorted(values);
    let summary = TukeySummary::from_sorted(&s);
    let count = s.iter().filter(|&&v| summary.is_outlier(v)).count() as u64;
    Ok(summary.strength(count))
}

/// Normalised Shannon entropy over value frequencies; the ranking strength
/// is `1 - H_norm`, so a few dominant values rank high.
pub fn heterogeneity(counts: &[u64]) -> Result<StrengthValue, Exclusion> {
    let n: u64 = counts.iter().sum();
    let distinct = counts.iter().filter(|&&c| c > 0).count() as u64;
    if distinct <= 1 {
        return Err(Exclusion::SingleCategory);
    }
    let total = n as f64;
    let h: f64 = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            -p * math::ln(p)
        })
        .sum();
    Ok(entropy_strength(n, distinct, h))
}

pub(crate) fn entropy_strength(n: u64, distinct: u64, entropy: f64) -> StrengthValue {
    let normalized = (entropy / math::ln(distinct as f64)).clamp(0.0, 1.0);
    StrengthValue {
        raw: normalized,
        strength: 1.0 - normalized,
        detail: Detail::Entropy { n, distinct, entropy, normalized },
    }
}

/// Frequencies of an integer-valued numeric column.
pub fn integer_counts(values: &[f64]) -> Vec<u64> {
    let s = sorted(values);
    let mut counts = Vec::new();
    let mut i = 0;
    while i < s.len() {
        let mut j = i;
        while j < s.len() && s[j] == s[i] {
            j += 1;
        }
        counts.push((j - i) as u64);
        i = j;
    }
    counts
}

/// Rows where both columns are present, as aligned value vectors.
pub fn pairwise_complete(
    x: impl Iterator<Item = Option<f64>>,
    y: impl Iterator<Item = Option<f64>>,
) -> (Vec<f64>, Vec<f64>) {
    x.zip(y)
        .filter_map(|(a, b)| Some((a?, b?)))
        .unzip()
}

/// Pearson correlation over aligned samples; ranks by `|rho|`.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<StrengthValue, Exclusion> {
    assert_eq!(x.len(), y.len(), "pearson needs aligned samples");
    if x.len() < 3 {
        return Err(Exclusion::TooFewValues);
    }
    let constant = |v: &[f64]| v.iter().all(|&a| a == v[0]);
    if constant(x) || constant(y) {
        return Err(Exclusion::Constant);
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Exclusion::Constant);
    }
    let rho = (sxy / math::sqrt(sxx * syy)).clamp(-1.0, 1.0);
    let slope = sxy / sxx;
    Ok(StrengthValue {
        raw: rho,
        strength: rho.abs(),
        detail: Detail::Correlation {
            n: x.len() as u64,
            slope,
            intercept: my - slope * mx,
            p_value: None,
        },
    })
}

/// Two-sided p-value of the t-test for zero correlation.
pub fn correlation_p_value(rho: f64, n: u64) -> f64 {
    let dof = n as f64 - 2.0;
    if rho.abs() >= 1.0 {
        return 0.0;
    }
    let t = rho * math::sqrt(dof / (1.0 - rho * rho));
    math::student_t_two_sided_p(t, dof)
}

/// Keeps `|rho|` only when the correlation test is significant at `alpha`
/// (`p <= alpha`), otherwise the strength is zero.
pub fn adjust_for_significance(mut value: StrengthValue, alpha: f64) -> Result<StrengthValue, Exclusion> {
    let Detail::Correlation { n, ref mut p_value, .. } = value.detail else {
        return Ok(value);
    };
    if n <= 2 {
        return Err(Exclusion::TooFewValues);
    }
    let p = correlation_p_value(value.raw, n);
    *p_value = Some(p);
    if p > alpha || value.raw == 0.0 {
        value.strength = 0.0;
    }
    Ok(value)
}

pub fn significance_adjusted_pearson(x: &[f64], y: &[f64], alpha: f64) -> Result<StrengthValue, Exclusion> {
    adjust_for_significance(pearson(x, y)?, alpha)
}

/// Orders strengths for ranking; NaN never reaches here. Signed zeros are
/// equal so they tie and fall back to tuple order.
pub fn compare_strength(a: f64, b: f64, order: Order) -> Ordering {
    let (a, b) = (a + 0.0, b + 0.0);
    match order {
        Order::Ascending => a.total_cmp(&b),
        Order::Descending => b.total_cmp(&a),
    }
}
