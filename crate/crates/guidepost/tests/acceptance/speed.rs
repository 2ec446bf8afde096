use std::hint::black_box;
use std::time::Instant;

use guidepost_core::descriptors;
use guidepost_core::sketch::hyperplane::{build_signatures, HyperplaneInput};
use guidepost_core::sketch::{approx_pearson, HyperplaneSketch};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::gen::correlated;
use crate::Outcome;

const K: usize = 1024;
const SIZES: [usize; 3] = [10_000, 100_000, 1_000_000];
const MIN_SPEEDUP: f64 = 10.0;
const FLATNESS: f64 = 0.2;

fn sketches(x: &[f64], y: &[f64]) -> (HyperplaneSketch, HyperplaneSketch) {
    let present = vec![true; x.len()];
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let inputs = [
        HyperplaneInput { values: x, present: &present, mean: mean(x), complete: true },
        HyperplaneInput { values: y, present: &present, mean: mean(y), complete: true },
    ];
    let mut s = build_signatures(K, 42, 0, &inputs);
    let b = s.pop().unwrap();
    (s.pop().unwrap(), b)
}

/// Median seconds per call over several timed batches.
fn per_call(batches: usize, calls: usize, mut f: impl FnMut()) -> f64 {
    f();
    let mut times: Vec<f64> = (0..batches)
        .map(|_| {
            let t = Instant::now();
            for _ in 0..calls {
                f();
            }
            t.elapsed().as_secs_f64() / calls as f64
        })
        .collect();
    times.sort_by(f64::total_cmp);
    times[batches / 2]
}

/// Sketch comparison cost against the exact two-pass coefficient, and its
/// dependence on the row count.
pub fn run() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut approx = Vec::new();
    let mut exact_at_max = 0.0;
    for &n in &SIZES {
        let (x, y) = correlated(&mut rng, n, 0.6);
        let (sx, sy) = sketches(&x, &y);
        approx.push(per_call(15, 200_000, || {
            black_box(approx_pearson(black_box(&sx), black_box(&sy)).unwrap());
        }));
        if n == SIZES[SIZES.len() - 1] {
            exact_at_max = per_call(7, 3, || {
                black_box(descriptors::pearson(black_box(&x), black_box(&y)).unwrap());
            });
        }
    }
    let speedup = exact_at_max / approx[approx.len() - 1];
    let base = approx[0];
    let spread = approx.iter().map(|t| (t / base - 1.0).abs()).fold(0.0, f64::max);
    let latencies: Vec<String> = SIZES.iter().zip(&approx).map(|(n, t)| format!("n={n}: {:.1} ns", t * 1e9)).collect();
    Outcome::new(
        speedup >= MIN_SPEEDUP && spread <= FLATNESS,
        format!(
            "sketch rho {:.0}x faster than exact at n=1e6 (need {MIN_SPEEDUP}x; exact {:.2} ms); latency {} (max deviation {:.1}%, allowed {:.0}%)",
            speedup,
            exact_at_max * 1e3,
            latencies.join(", "),
            spread * 100.0,
            FLATNESS * 100.0
        ),
    )
}
