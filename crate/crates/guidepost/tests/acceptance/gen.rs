//! Seeded synthetic data.

use guidepost_core::table::{CategoricalColumn, ColumnData, NumericColumn};
use guidepost_core::Dataset;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, LogNormal, StandardNormal, StudentT};

pub fn normals(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// `y = rho x + sqrt(1 - rho^2) z` with independent standard normals; the
/// population correlation is `rho`.
pub fn correlated(rng: &mut ChaCha8Rng, n: usize, rho: f64) -> (Vec<f64>, Vec<f64>) {
    let x = normals(rng, n);
    let z = normals(rng, n);
    let c = (1.0 - rho * rho).sqrt();
    let y = x.iter().zip(&z).map(|(a, b)| rho * a + c * b).collect();
    (x, y)
}

fn centre(v: &mut [f64]) {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= m);
}

fn unit(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
}

/// Centred unit vectors whose sample correlation is exactly `rho` up to
/// rounding: `x` and the part of `z` orthogonal to it.
pub fn exact_pair(rng: &mut ChaCha8Rng, n: usize, rho: f64) -> (Vec<f64>, Vec<f64>) {
    let mut x = normals(rng, n);
    centre(&mut x);
    unit(&mut x);
    let y = partner(rng, &x, rho);
    (x, y)
}

/// A centred unit vector with sample correlation `rho` to the centred unit
/// vector `x`.
pub fn partner(rng: &mut ChaCha8Rng, x: &[f64], rho: f64) -> Vec<f64> {
    let n = x.len();
    let mut z = normals(rng, n);
    centre(&mut z);
    let dot: f64 = x.iter().zip(&z).map(|(a, b)| a * b).sum();
    z.iter_mut().zip(x).for_each(|(b, a)| *b -= dot * a);
    unit(&mut z);
    let c = (1.0 - rho * rho).sqrt();
    x.iter().zip(&z).map(|(a, b)| rho * a + c * b).collect()
}

/// A numeric column from one of several shapes, with optional missing cells.
pub fn numeric_column(rng: &mut ChaCha8Rng, n: usize) -> Vec<Option<f64>> {
    let shape = rng.gen_range(0..8);
    let scale = 10f64.powi(rng.gen_range(-2..4));
    let shift = if rng.gen_bool(0.5) { 0.0 } else { rng.gen_range(-5.0..50.0) * scale };
    let missing = if rng.gen_bool(0.3) { rng.gen_range(0.0..0.1) } else { 0.0 };
    let heavy = StudentT::new(3.0).unwrap();
    let logn = LogNormal::new(0.0, 1.0).unwrap();
    let exp = Exp::new(1.0).unwrap();
    let k = rng.gen_range(2..30);
    (0..n)
        .map(|_| {
            let v = match shape {
                0 => StandardNormal.sample(rng),
                1 => logn.sample(rng),
                2 => exp.sample(rng),
                3 => heavy.sample(rng),
                4 => rng.gen::<f64>(),
                5 => {
                    if rng.gen_bool(0.02) {
                        rng.gen_range(20.0..40.0)
                    } else {
                        StandardNormal.sample(rng)
                    }
                }
                _ => f64::from(rng.gen_range(0..k)),
            };
            let v = if shape >= 6 { v + shift.round() } else { v * scale + shift };
            (!rng.gen_bool(missing)).then_some(v)
        })
        .collect()
}

/// `y` partially driven by `x`, present where `y` is drawn.
pub fn related_column(rng: &mut ChaCha8Rng, x: &[Option<f64>]) -> Vec<Option<f64>> {
    let w = rng.gen_range(-2.0..2.0);
    let noise = 10f64.powi(rng.gen_range(-1..3));
    x.iter()
        .map(|v| {
            if rng.gen_bool(0.03) {
                return None;
            }
            let e: f64 = StandardNormal.sample(rng);
            Some(w * v.unwrap_or(0.0) + noise * e)
        })
        .collect()
}

pub fn labels(rng: &mut ChaCha8Rng, n: usize) -> Vec<Option<String>> {
    let k = rng.gen_range(1..12);
    let skew = rng.gen_range(0.0..3.0);
    (0..n)
        .map(|_| {
            if rng.gen_bool(0.02) {
                return None;
            }
            let u: f64 = rng.gen();
            let code = ((u.powf(1.0 + skew)) * k as f64) as usize;
            Some(format!("L{code}"))
        })
        .collect()
}

pub fn num(values: Vec<Option<f64>>) -> ColumnData {
    ColumnData::Numeric(NumericColumn::from_options(values))
}

pub fn cat(values: Vec<Option<String>>) -> ColumnData {
    ColumnData::Categorical(CategoricalColumn::from_options(values))
}

pub fn dataset(columns: Vec<ColumnData>) -> Dataset {
    Dataset::from_columns(columns.into_iter().enumerate().map(|(i, c)| (format!("c{i}"), c)).collect()).unwrap()
}

pub fn full(values: &[f64]) -> Vec<Option<f64>> {
    values.iter().copied().map(Some).collect()
}
