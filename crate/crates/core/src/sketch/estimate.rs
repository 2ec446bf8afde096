//! Approximate strength metrics and chart payloads composed from sketches.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::descriptors::{self, Exclusion, StrengthValue, TukeySummary};
use crate::math;
use crate::payload::{self, VisualizationPayload};
use crate::sketch::frequent::MisraGries;
use crate::sketch::moments::{MomentMetrics, MomentSketch};
use crate::sketch::quantiles::{QuantileSketch, QuantileView};

pub fn moments_to_metrics(sketch: &MomentSketch) -> Option<MomentMetrics> {
    sketch.metrics()
}

/// Five-number summary and fences from sketch quantiles.
pub fn tukey_summary(view: &QuantileView) -> TukeySummary {
    TukeySummary::from_quartiles(
        view.count(),
        view.quantile(0.0),
        view.quantile(0.25),
        view.quantile(0.5),
        view.quantile(0.75),
        view.quantile(1.0),
    )
}

pub fn approx_qcd(sketch: &QuantileSketch) -> Result<StrengthValue, Exclusion> {
    if sketch.count() < 2 {
        return Err(Exclusion::TooFewValues);
    }
    let view = sketch.view();
    descriptors::qcd_from_quartiles(view.quantile(0.25), view.quantile(0.75))
}

/// Tukey outlier count from sketch ranks: `n - (rank(<= high) - rank(< low))`.
/// Each rank is off by at most the sketch's error, and the quartiles that
/// place the fences are off by at most that much in rank.
pub fn estimate_outlier_count(sketch: &QuantileSketch) -> Result<StrengthValue, Exclusion> {
    if sketch.count() < 4 {
        return Err(Exclusion::TooFewValues);
    }
    let view = sketch.view();
    let summary = tukey_summary(&view);
    Ok(summary.strength(outliers_from_view(&view, &summary)))
}

pub(crate) fn outliers_from_view(view: &QuantileView, summary: &TukeySummary) -> u64 {
    let inside = view.rank(summary.fence_high).saturating_sub(view.rank_exclusive(summary.fence_low));
    view.count().saturating_sub(inside)
}

/// Distinct-count estimate for a column whose exact count overflowed
/// `cap`: Chao1 on the sample, never below `cap + 1`.
pub fn estimate_distinct<K: Ord>(sample: impl IntoIterator<Item = K>, cap: usize) -> u64 {
    let mut freq: BTreeMap<K, u64> = BTreeMap::new();
    sample.into_iter().for_each(|k| *freq.entry(k).or_insert(0) += 1);
    let observed = freq.len() as f64;
    let f1 = freq.values().filter(|&&c| c == 1).count() as f64;
    let f2 = freq.values().filter(|&&c| c == 2).count() as f64;
    let chao1 = if f2 > 0.0 { observed + f1 * f1 / (2.0 * f2) } else { observed + f1 * (f1 - 1.0) / 2.0 };
    (math::round(chao1) as u64).max(cap as u64 + 1)
}

/// Normalised entropy from a frequent-items summary and a sample.
///
/// Tracked values contribute their (lower-bound) counts. The remaining mass
/// `n - sum(counts)` is split across untracked values seen in the sample in
/// proportion to their sample frequency, or kept as one lump if the sample
/// has none. The entropy is normalised by `ln(distinct)`.
pub fn estimate_entropy<K: Ord + Clone>(
    heavy: &MisraGries<K>,
    sample: impl IntoIterator<Item = K>,
    distinct: u64,
) -> Result<StrengthValue, Exclusion> {
    let n = heavy.count();
    if distinct <= 1 || n == 0 {
        return Err(Exclusion::SingleCategory);
    }
    let mut masses: Vec<f64> = heavy.counters().map(|(_, c)| c as f64).collect();
    let tracked: u64 = heavy.counters().map(|(_, c)| c).sum();
    let residual = n.saturating_sub(tracked) as f64;
    if residual > 0.0 {
        let mut tail: BTreeMap<K, u64> = BTreeMap::new();
        for k in sample {
            if !heavy.is_tracked(&k) {
                *tail.entry(k).or_insert(0) += 1;
            }
        }
        let seen: u64 = tail.values().sum();
        if seen == 0 {
            masses.push(residual);
        } else {
            masses.extend(tail.values().map(|&c| residual * c as f64 / seen as f64));
        }
    }
    let total = n as f64;
    let entropy: f64 = masses
        .iter()
        .filter(|&&m| m > 0.0)
        .map(|&m| {
            let p = m / total;
            -p * math::ln(p)
        })
        .sum();
    Ok(descriptors::entropy_strength(n, distinct, entropy))
}

/// Equal-width histogram whose counts are sketch rank differences; the
/// counts always sum to the sketch's count.
pub fn approx_histogram(sketch: &QuantileSketch, bin_count: usize) -> VisualizationPayload {
    let view = sketch.view();
    let edges = payload::histogram_edges(sketch.min(), sketch.max(), bin_count);
    let bins = edges.len() - 1;
    let mut below = vec![0u64; bins + 1];
    for (b, slot) in below.iter_mut().enumerate().take(bins).skip(1) {
        *slot = view.rank_exclusive(edges[b]);
    }
    below[bins] = view.count();
    let counts = (0..bins).map(|b| below[b + 1].saturating_sub(below[b])).collect();
    VisualizationPayload::Histogram { edges, counts }
}
