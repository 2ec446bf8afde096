use guidepost::build_bundle_parallel;
use guidepost_core::engine::guidepost_id;
use guidepost_core::table::ColumnData;
use guidepost_core::{
    Dataset, DescriptorKind, Explorer, GuidepostQuery, Metric, Mode, Order, QuerySettings, SketchConfig, Tuple,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::gen;
use crate::oracle::{self, rel_err};
use crate::Outcome;

const EXACT_DATASETS: usize = 20;
const APPROX_DATASETS: usize = 100;
const APPROX_D: usize = 8;
const APPROX_N: usize = 5000;
const TAU_MIN: f64 = 0.8;
const TOP_GAP: f64 = 0.15;
const TOP1_MIN: f64 = 0.95;
const TIE: f64 = 1e-9;

pub fn id_of(ds: &Dataset, d: DescriptorKind, tuple: &Tuple) -> String {
    guidepost_id(ds.id(), d, tuple)
}

fn cells(ds: &Dataset, c: usize) -> Vec<Option<f64>> {
    ds.numeric(c).unwrap().iter().collect()
}

fn present(ds: &Dataset, c: usize) -> Vec<f64> {
    cells(ds, c).into_iter().flatten().collect()
}

fn constant(v: &[f64]) -> bool {
    v.iter().all(|&x| x == v[0])
}

/// Oracle strength of one instance, `None` when it is not admissible.
pub fn strength(ds: &Dataset, d: DescriptorKind, t: &Tuple, settings: &QuerySettings) -> Option<f64> {
    match (d, t.indices()) {
        (DescriptorKind::LinearRelationship, &[x, y]) => {
            let (px, py) = (present(ds, x), present(ds, y));
            if px.len() < 3 || py.len() < 3 || constant(&px) || constant(&py) {
                return None;
            }
            let (a, b) = oracle::complete(&cells(ds, x), &cells(ds, y));
            let r = oracle::pearson(&a, &b)?;
            Some(match settings.metric {
                Metric::Preferred => r.abs(),
                Metric::SignificanceAdjusted => {
                    let p = oracle::p_value(r, a.len());
                    if p <= settings.alpha.unwrap_or(0.05) && r != 0.0 {
                        r.abs()
                    } else {
                        0.0
                    }
                }
            })
        }
        (DescriptorKind::HeterogeneousFrequencies, &[c]) => match &ds.columns()[c].data {
            ColumnData::Categorical(col) => {
                oracle::heterogeneity((0..ds.n()).filter_map(|r| col.get(r).map(str::to_owned)))
            }
            ColumnData::Numeric(_) => oracle::heterogeneity(present(ds, c).into_iter().map(|v| v as i64)),
        },
        (_, &[c]) => {
            let v = present(ds, c);
            match d {
                DescriptorKind::Dispersion => oracle::qcd(&v),
                DescriptorKind::Skew => oracle::skewness(&v).map(f64::abs),
                DescriptorKind::HeavyTails => oracle::kurtosis(&v),
                DescriptorKind::Outliers => oracle::outliers(&v).map(|(n, _, _)| n as f64),
                _ => None,
            }
        }
        _ => None,
    }
}

/// The instance domain written out from the descriptor definitions.
fn domain(ds: &Dataset, d: DescriptorKind) -> Vec<Tuple> {
    let numeric: Vec<usize> = (0..ds.d()).filter(|&c| ds.numeric(c).is_some()).collect();
    match d {
        DescriptorKind::LinearRelationship => numeric
            .iter()
            .enumerate()
            .flat_map(|(a, &i)| numeric[a + 1..].iter().map(move |&j| Tuple::pair(i, j)))
            .collect(),
        DescriptorKind::HeterogeneousFrequencies => (0..ds.d())
            .filter(|&c| ds.numeric(c).is_none() || ds.columns()[c].meta.integer_valued)
            .map(Tuple::unary)
            .collect(),
        _ => numeric.into_iter().map(Tuple::unary).collect(),
    }
}

/// Filter, sort by strength in the requested order with ties by tuple, and
/// keep `k`.
fn brute_force(ds: &Dataset, query: &GuidepostQuery) -> Vec<(Tuple, f64)> {
    let s = &query.settings;
    let mut scored: Vec<(Tuple, f64)> = domain(ds, query.descriptor)
        .into_iter()
        .filter_map(|t| strength(ds, query.descriptor, &t, s).map(|v| (t, v)))
        .filter(|(_, v)| s.min.map_or(true, |m| *v >= m) && s.max.map_or(true, |m| *v <= m))
        .collect();
    let order = s.order.unwrap_or(query.descriptor.default_order());
    scored.sort_by(|a, b| {
        let by = a.1.partial_cmp(&b.1).unwrap();
        let by = if order == Order::Descending { by.reverse() } else { by };
        by.then_with(|| a.0.cmp(&b.0))
    });
    scored.truncate(query.k);
    scored
}

fn random_dataset(rng: &mut ChaCha8Rng) -> Dataset {
    let d = rng.gen_range(2..=20);
    let n = rng.gen_range(20..=5000);
    let mut numeric: Vec<Vec<Option<f64>>> = Vec::new();
    let mut columns = Vec::new();
    for _ in 0..d {
        let kind = rng.gen_range(0..10);
        let col = match kind {
            0 => gen::cat(gen::labels(rng, n)),
            1 if !numeric.is_empty() => gen::num(numeric.choose(rng).unwrap().clone()),
            2 => gen::num(vec![Some(rng.gen_range(-3.0..3.0f64).round()); n]),
            3 if !numeric.is_empty() => {
                let base = numeric.choose(rng).unwrap().clone();
                gen::num(gen::related_column(rng, &base))
            }
            4 => {
                let k = rng.gen_range(1..6);
                gen::num((0..n).map(|_| Some(f64::from(rng.gen_range(0..k)))).collect())
            }
            _ => gen::num(gen::numeric_column(rng, n)),
        };
        if let ColumnData::Numeric(c) = &col {
            numeric.push(c.iter().collect());
        }
        columns.push(col);
    }
    gen::dataset(columns)
}

fn random_query(rng: &mut ChaCha8Rng, ds: &Dataset, d: DescriptorKind, variant: usize) -> GuidepostQuery {
    let mut q = GuidepostQuery::new(d).k(if variant % 2 == 0 { 10 } else { rng.gen_range(1..=200) });
    if variant == 1 {
        let flipped = match d.default_order() {
            Order::Ascending => Order::Descending,
            Order::Descending => Order::Ascending,
        };
        q = q.order(flipped);
    }
    if variant == 2 {
        let mut values: Vec<f64> = domain(ds, d).iter().filter_map(|t| strength(ds, d, t, &q.settings)).collect();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if values.len() >= 2 {
            let lo = values[rng.gen_range(0..values.len() / 2 + 1)];
            let hi = values[rng.gen_range(values.len() / 2..values.len())];
            // Bounds strictly between sample strengths keep membership unambiguous.
            q = q.filter(rng.gen_bool(0.8).then_some(lo - 1e-7 * lo.abs().max(1.0)), rng.gen_bool(0.8).then_some(hi + 1e-7 * hi.abs().max(1.0)));
        }
    }
    if variant == 3 && d == DescriptorKind::LinearRelationship {
        q = q.significance(Some([0.001, 0.01, 0.05][rng.gen_range(0..3)]));
    }
    q
}

/// Positions agree when the tuples match or the oracle strengths tie.
fn same_ranking(engine: &[(Tuple, f64)], truth: &[(Tuple, f64)]) -> Result<(), String> {
    if engine.len() != truth.len() {
        return Err(format!("{} results vs {} expected", engine.len(), truth.len()));
    }
    for (i, ((te, se), (tt, st))) in engine.iter().zip(truth).enumerate() {
        if rel_err(*se, *st) > TIE {
            return Err(format!("position {i}: strength {se} vs {st}"));
        }
        if te != tt && !truth.iter().any(|(t, s)| t == te && rel_err(*s, *st) <= TIE) {
            return Err(format!("position {i}: {te:?} vs {tt:?}; engine {engine:?} truth {truth:?}"));
        }
    }
    Ok(())
}

fn exact_suite() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(0x4a4b);
    let mut queries = 0;
    let mut failures = Vec::new();
    for case in 0..EXACT_DATASETS {
        let ds = random_dataset(&mut rng);
        let ex = Explorer::new(&ds);
        for d in DescriptorKind::ALL {
            for variant in 0..4 {
                let q = random_query(&mut rng, &ds, d, variant);
                let engine: Vec<(Tuple, f64)> =
                    ex.rank(&q).unwrap().into_iter().map(|g| (g.tuple, g.value.strength)).collect();
                let truth = brute_force(&ds, &q);
                queries += 1;
                if let Err(e) = same_ranking(&engine, &truth) {
                    failures.push(format!("dataset {case} {} variant {variant}: {e}", d.name()));
                }
            }
        }
    }
    let mut detail = format!("exact: {}/{queries} queries match brute force on {EXACT_DATASETS} datasets", queries - failures.len());
    if let Some(f) = failures.first() {
        detail.push_str(&format!(" (first mismatch: {f})"));
    }
    (failures.is_empty(), detail)
}

/// Three latent factors with random loadings, plus one or two planted near
/// copies, so pair strengths spread over `[0, 1]`.
fn factor_dataset(rng: &mut ChaCha8Rng) -> Dataset {
    let factors: Vec<Vec<f64>> = (0..3).map(|_| gen::normals(rng, APPROX_N)).collect();
    let mut cols: Vec<Vec<f64>> = Vec::new();
    for j in 0..APPROX_D {
        let planted = j >= APPROX_D - 2 && rng.gen_bool(0.7);
        let col = if planted {
            let rho = rng.gen_range(0.75..0.99);
            let base = cols.choose(rng).unwrap().clone();
            let noise = gen::normals(rng, APPROX_N);
            let sd = (base.iter().map(|v| v * v).sum::<f64>() / APPROX_N as f64).sqrt();
            base.iter().zip(&noise).map(|(b, e)| rho * b + (1.0 - rho * rho).sqrt() * sd * e).collect()
        } else {
            let loadings: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.5..1.5)).collect();
            let noise = gen::normals(rng, APPROX_N);
            let scale = rng.gen_range(0.2..1.5);
            (0..APPROX_N)
                .map(|r| loadings.iter().zip(&factors).map(|(l, f)| l * f[r]).sum::<f64>() + scale * noise[r])
                .collect()
        };
        cols.push(col);
    }
    gen::dataset(cols.iter().map(|c| gen::num(gen::full(c))).collect())
}

fn approx_suite() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7a0);
    let config = SketchConfig { k: 1024, ..SketchConfig::default() };
    let d = DescriptorKind::LinearRelationship;
    let approx = QuerySettings { mode: Mode::Approximate, ..QuerySettings::default() };
    let (mut taus, mut gapped, mut agree) = (Vec::new(), 0, 0);
    let (mut all_exact, mut all_approx) = (Vec::new(), Vec::new());
    for _ in 0..APPROX_DATASETS {
        let ds = factor_dataset(&mut rng);
        let bundle = build_bundle_parallel(&ds, &config).unwrap();
        let ex = Explorer::new(&ds).with_bundle(Some(&bundle));
        let tuples = domain(&ds, d);
        let exact: Vec<f64> = tuples.iter().map(|t| strength(&ds, d, t, &QuerySettings::default()).unwrap()).collect();
        let sketched: Vec<f64> =
            tuples.iter().map(|t| ex.evaluate(d, t, &approx).unwrap().unwrap().strength).collect();
        taus.push(oracle::kendall_tau(&exact, &sketched));
        all_exact.extend_from_slice(&exact);
        all_approx.extend_from_slice(&sketched);

        let mut by_exact: Vec<usize> = (0..tuples.len()).collect();
        by_exact.sort_by(|&a, &b| exact[b].partial_cmp(&exact[a]).unwrap());
        if exact[by_exact[0]] - exact[by_exact[1]] > TOP_GAP {
            gapped += 1;
            let top = ex.rank(&GuidepostQuery::new(d).mode(Mode::Approximate).k(1)).unwrap();
            agree += usize::from(top[0].tuple == tuples[by_exact[0]]);
        }
    }
    let mean_tau = taus.iter().sum::<f64>() / taus.len() as f64;
    let min_tau = taus.iter().cloned().fold(f64::INFINITY, f64::min);
    let pooled = oracle::kendall_tau(&all_exact, &all_approx);
    let top1 = if gapped == 0 { 0.0 } else { agree as f64 / gapped as f64 };
    let ok = mean_tau >= TAU_MIN && pooled >= TAU_MIN && gapped > 0 && top1 >= TOP1_MIN;
    (
        ok,
        format!(
            "approx: mean Kendall tau {mean_tau:.3} over {APPROX_DATASETS} datasets (min {min_tau:.3}, pooled {pooled:.3}); top-1 agreement {agree}/{gapped} where the exact gap exceeds {TOP_GAP}"
        ),
    )
}

pub fn run() -> Outcome {
    let (e_ok, e) = exact_suite();
    let (a_ok, a) = approx_suite();
    Outcome::new(e_ok && a_ok, format!("{e}; {a}"))
}
