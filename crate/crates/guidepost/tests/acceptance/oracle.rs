//! Naive reference implementations, written from the metric definitions
//! without reusing any library code.

use std::collections::HashMap;

use statrs::distribution::{ContinuousCDF, StudentsT};

pub fn sort(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

/// Hyndman-Fan type 7.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    if lo + 1 >= sorted.len() {
        return sorted[lo];
    }
    sorted[lo] + (h - lo as f64) * (sorted[lo + 1] - sorted[lo])
}

pub fn qcd(values: &[f64]) -> Option<f64> {
    if values.len() < 2 {
        return None;
    }
    let s = sort(values);
    let (q1, q3) = (quantile(&s, 0.25), quantile(&s, 0.75));
    if q1 + q3 == 0.0 {
        return None;
    }
    let v = (q3 - q1) / (q3 + q1);
    v.is_finite().then_some(v)
}

fn is_constant(values: &[f64]) -> bool {
    values.iter().all(|&v| v == values[0])
}

fn central(values: &[f64]) -> Option<(f64, f64, f64)> {
    if values.is_empty() || is_constant(values) {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let moment = |p: i32| values.iter().map(|v| (v - mean).powi(p)).sum::<f64>() / n;
    Some((moment(2), moment(3), moment(4)))
}

/// Signed skewness.
pub fn skewness(values: &[f64]) -> Option<f64> {
    central(values).map(|(m2, m3, _)| m3 / m2.powf(1.5))
}

/// Non-excess kurtosis.
pub fn kurtosis(values: &[f64]) -> Option<f64> {
    central(values).map(|(m2, _, m4)| m4 / (m2 * m2))
}

/// Tukey count and fences.
pub fn outliers(values: &[f64]) -> Option<(u64, f64, f64)> {
    if values.len() < 4 {
        return None;
    }
    let s = sort(values);
    let (q1, q3) = (quantile(&s, 0.25), quantile(&s, 0.75));
    let (lo, hi) = (q1 - 1.5 * (q3 - q1), q3 + 1.5 * (q3 - q1));
    Some((s.iter().filter(|&&v| v < lo || v > hi).count() as u64, lo, hi))
}

/// Normalised entropy of the value frequencies.
pub fn normalized_entropy<K: std::hash::Hash + Eq>(items: impl IntoIterator<Item = K>) -> Option<f64> {
    let mut counts: HashMap<K, u64> = HashMap::new();
    let mut n = 0u64;
    for k in items {
        *counts.entry(k).or_default() += 1;
        n += 1;
    }
    if counts.len() < 2 {
        return None;
    }
    let h: f64 = counts
        .values()
        .map(|&c| {
            let p = c as f64 / n as f64;
            -p * p.ln()
        })
        .sum();
    Some((h / (counts.len() as f64).ln()).clamp(0.0, 1.0))
}

/// Strength ranked by the frequency descriptor.
pub fn heterogeneity<K: std::hash::Hash + Eq>(items: impl IntoIterator<Item = K>) -> Option<f64> {
    normalized_entropy(items).map(|h| 1.0 - h)
}

/// Rows where both cells are present.
pub fn complete(x: &[Option<f64>], y: &[Option<f64>]) -> (Vec<f64>, Vec<f64>) {
    x.iter().zip(y).filter_map(|(a, b)| Some(((*a)?, (*b)?))).unzip()
}

/// Textbook two-pass sample correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() < 3 || is_constant(x) || is_constant(y) {
        return None;
    }
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Two-sided p-value of the t-test for zero correlation.
pub fn p_value(rho: f64, n: usize) -> f64 {
    if rho.abs() >= 1.0 {
        return 0.0;
    }
    let dof = n as f64 - 2.0;
    let t = rho * (dof / (1.0 - rho * rho)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, dof).unwrap();
    2.0 * dist.sf(t.abs())
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    (a - b).abs() / a.abs().max(b.abs())
}

/// Kendall tau-b between two paired score lists.
pub fn kendall_tau(a: &[f64], b: &[f64]) -> f64 {
    let (mut concordant, mut discordant, mut ties_a, mut ties_b) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            let da = (a[i] - a[j]).partial_cmp(&0.0).unwrap() as i64;
            let db = (b[i] - b[j]).partial_cmp(&0.0).unwrap() as i64;
            match (da, db) {
                (0, 0) => {}
                (0, _) => ties_a += 1,
                (_, 0) => ties_b += 1,
                _ if da == db => concordant += 1,
                _ => discordant += 1,
            }
        }
    }
    let n1 = (concordant + discordant + ties_a) as f64;
    let n2 = (concordant + discordant + ties_b) as f64;
    (concordant - discordant) as f64 / (n1 * n2).sqrt()
}
