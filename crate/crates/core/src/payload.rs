//! Chart payloads: pre-binned, pre-sampled data a client can draw directly.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::descriptors::{sorted, TukeySummary};
use crate::math;

/// Label used for the aggregated tail bar of a truncated Pareto chart.
pub const OTHER_LABEL: &str = "(other)";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum VisualizationPayload {
    Histogram {
        edges: Vec<f64>,
        counts: Vec<u64>,
    },
    BoxPlot {
        min: f64,
        q1: f64,
        median: f64,
        q3: f64,
        max: f64,
        fence_low: f64,
        fence_high: f64,
        outliers: Vec<f64>,
        /// Outliers in the column; `outliers` may list fewer.
        outlier_total: u64,
    },
    Pareto {
        categories: Vec<String>,
        counts: Vec<u64>,
        cumulative: Vec<f64>,
    },
    Scatter {
        points: Vec<[f64; 2]>,
        slope: f64,
        intercept: f64,
    },
}

/// Equal-width histogram over `[min, max]`. Bins are half-open except the
/// last; a zero-width range collapses to a single bin.
pub fn histogram(values: &[f64], bin_count: usize) -> VisualizationPayload {
    assert!(bin_count >= 1 && !values.is_empty());
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let edges = histogram_edges(lo, hi, bin_count);
    let bins = edges.len() - 1;
    let mut counts = vec![0u64; bins];
    for &v in values {
        counts[bin_index(&edges, v)] += 1;
    }
    VisualizationPayload::Histogram { edges, counts }
}

pub fn histogram_edges(lo: f64, hi: f64, bin_count: usize) -> Vec<f64> {
    if lo == hi {
        return vec![lo, hi];
    }
    let width = (hi - lo) / bin_count as f64;
    let mut edges: Vec<f64> = (0..bin_count).map(|i| lo + width * i as f64).collect();
    edges.push(hi);
    edges
}

fn bin_index(edges: &[f64], v: f64) -> usize {
    let bins = edges.len() - 1;
    let (lo, hi) = (edges[0], edges[bins]);
    if hi == lo {
        return 0;
    }
    let guess = math::floor((v - lo) / (hi - lo) * bins as f64) as isize;
    let mut i = guess.clamp(0, bins as isize - 1) as usize;
    // Nudge across edges rounding may have missed.
    while i > 0 && v < edges[i] {
        i -= 1;
    }
    while i + 1 < bins && v >= edges[i + 1] {
        i += 1;
    }
    i
}

pub fn boxplot(values: &[f64], max_outliers: usize) -> VisualizationPayload {
    let s = sorted(values);
    let summary = TukeySummary::from_sorted(&s);
    let outliers: Vec<f64> = s.iter().copied().filter(|&v| summary.is_outlier(v)).collect();
    boxplot_from_summary(&summary, outliers, max_outliers)
}

/// Box plot from a summary and a list of outlier values. When the list is
/// longer than `max_outliers`, the most extreme values on each side are kept.
pub fn boxplot_from_summary(
    summary: &TukeySummary,
    mut outliers: Vec<f64>,
    max_outliers: usize,
) -> VisualizationPayload {
    outliers.sort_unstable_by(f64::total_cmp);
    let total = outliers.len() as u64;
    if outliers.len() > max_outliers {
        let keep_low = max_outliers / 2;
        let keep_high = max_outliers - keep_low;
        let tail = outliers.split_off(outliers.len() - keep_high);
        outliers.truncate(keep_low);
        outliers.extend(tail);
    }
    boxplot_with_total(summary, outliers, total)
}

pub fn boxplot_with_total(summary: &TukeySummary, outliers: Vec<f64>, total: u64) -> VisualizationPayload {
    VisualizationPayload::BoxPlot {
        min: summary.min,
        q1: summary.q1,
        median: summary.median,
        q3: summary.q3,
        max: summary.max,
        fence_low: summary.fence_low,
        fence_high: summary.fence_high,
        outliers,
        outlier_total: total,
    }
}

/// Pareto chart from labelled counts. Bars are sorted by descending count
/// (ties by label); past `max_bars` the remainder is one trailing
/// [`OTHER_LABEL`] bar so the cumulative line still ends at 1.
pub fn pareto(mut items: Vec<(String, u64)>, total: u64, max_bars: usize) -> VisualizationPayload {
    items.retain(|(_, c)| *c > 0);
    items.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    if items.len() > max_bars {
        items.truncate(max_bars.saturating_sub(1));
    }
    let listed: u64 = items.iter().map(|(_, c)| c).sum();
    if listed < total {
        items.push((String::from(OTHER_LABEL), total - listed));
    }
    let mut running = 0u64;
    let mut cumulative = Vec::with_capacity(items.len());
    for (_, c) in &items {
        running += c;
        cumulative.push(if running >= total { 1.0 } else { running as f64 / total as f64 });
    }
    let (categories, counts) = items.into_iter().unzip();
    VisualizationPayload::Pareto { categories, counts, cumulative }
}

/// Least-squares fit `y = slope x + intercept` over aligned samples.
pub fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
    }
    let slope = if sxx == 0.0 { 0.0 } else { sxy / sxx };
    (slope, my - slope * mx)
}

pub fn scatter(points: Vec<[f64; 2]>, slope: f64, intercept: f64) -> VisualizationPayload {
    VisualizationPayload::Scatter { points, slope, intercept }
}
