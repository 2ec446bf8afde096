//! Worked example values, each checked against an independent oracle.

use guidepost::{build_bundle_parallel, encode_bundle};
use guidepost_core::descriptors::Detail;
use guidepost_core::sketch::estimate::{estimate_entropy, estimate_outlier_count, moments_to_metrics};
use guidepost_core::sketch::hyperplane::{build_signatures, HyperplaneInput};
use guidepost_core::sketch::{approx_pearson, MisraGries, MomentSketch, QuantileSketch, ReservoirBuilder};
use guidepost_core::table::{infer_column_kind, Cell, CompareOp, NumericColumn, RowPredicate, RowQuery};
use guidepost_core::{
    ColumnKind, DescriptorKind, Explorer, GuidepostQuery, Metric, Mode, Order, Overview, QuerySettings, SketchConfig,
    Tuple, VisualizationPayload,
};
use guidepost_core::table::ColumnData;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};

use crate::gen::{self, correlated, exact_pair, normals};
use crate::{oracle, parity};

type Example = (&'static str, bool, String);

fn example(name: &'static str, ok: bool, detail: impl Into<String>) -> Example {
    (name, ok, detail.into())
}

fn numeric(columns: Vec<Vec<f64>>) -> guidepost_core::Dataset {
    gen::dataset(columns.iter().map(|c| gen::num(gen::full(c))).collect())
}

fn exact_value(ds: &guidepost_core::Dataset, d: DescriptorKind, t: Tuple, settings: &QuerySettings) -> Option<guidepost_core::StrengthValue> {
    Explorer::new(ds).evaluate(d, &t, settings).unwrap().ok()
}

fn table_examples(out: &mut Vec<Example>) {
    let kind = infer_column_kind(&["1", "2", "x"]).unwrap();
    out.push(example("type inference of [1, 2, x]", kind == ColumnKind::Categorical, format!("{kind:?}")));

    let ds = numeric(vec![vec![1.0, 2.0, 3.0, 4.0, 100.0]]);
    let page = ds
        .get_rows(&RowQuery {
            filter: Some(RowPredicate::Compare { column: 0, op: CompareOp::Gt, value: 7.0 }),
            projection: vec![],
            limit: 10,
            offset: 0,
        })
        .unwrap();
    let ok = page.total == 1 && page.rows[0].cells == vec![Cell::Number(100.0)];
    out.push(example("rows above the high fence", ok, format!("{} row(s), first {:?}", page.total, page.rows.first())));
}

fn metric_examples(out: &mut Vec<Example>) {
    let s = QuerySettings::default();
    let ds = numeric(vec![(1..=7).map(f64::from).collect()]);
    let v = exact_value(&ds, DescriptorKind::Dispersion, Tuple::unary(0), &s).unwrap().strength;
    let truth = oracle::qcd(&(1..=7).map(f64::from).collect::<Vec<_>>()).unwrap();
    out.push(example("qcd of 1..7", (v - 0.375).abs() < 1e-12 && (truth - 0.375).abs() < 1e-12, format!("{v}")));

    let ds = numeric(vec![vec![0.0, 0.0, 0.0, 1.0]]);
    let v = exact_value(&ds, DescriptorKind::Skew, Tuple::unary(0), &s).unwrap().raw;
    let truth = oracle::skewness(&[0.0, 0.0, 0.0, 1.0]).unwrap();
    out.push(example("skewness of [0,0,0,1]", (v - 2.0 / 3f64.sqrt()).abs() < 1e-12 && (v - truth).abs() < 1e-12, format!("{v:.6}")));

    let mut rng = ChaCha8Rng::seed_from_u64(144);
    let draws = normals(&mut rng, 100_000);
    let truth = oracle::kurtosis(&draws).unwrap();
    let ds = numeric(vec![draws]);
    let v = exact_value(&ds, DescriptorKind::HeavyTails, Tuple::unary(0), &s).unwrap().raw;
    out.push(example("kurtosis of 1e5 normals", (v - 3.0).abs() <= 0.15 && oracle::rel_err(v, truth) < 1e-9, format!("{v:.4}")));

    let ds = numeric(vec![vec![1.0, 2.0, 3.0, 4.0, 100.0], vec![1.0, 2.0, 3.0, 4.0, 5.0]]);
    let v = exact_value(&ds, DescriptorKind::Outliers, Tuple::unary(0), &s).unwrap();
    let fences = match v.detail {
        Detail::Tukey { fence_low, fence_high, .. } => (fence_low, fence_high),
        _ => (f64::NAN, f64::NAN),
    };
    let truth = oracle::outliers(&[1.0, 2.0, 3.0, 4.0, 100.0]).unwrap();
    let ok = v.strength == 1.0 && fences == (-1.0, 7.0) && (truth.0, truth.1, truth.2) == (1, -1.0, 7.0);
    out.push(example("outliers of [1,2,3,4,100]", ok, format!("count {} fences {fences:?}", v.strength)));
    let v = exact_value(&ds, DescriptorKind::Outliers, Tuple::unary(1), &s).unwrap().strength;
    out.push(example("outliers of [1,2,3,4,5]", v == 0.0, format!("count {v}")));

    let labels: Vec<Option<String>> = (0..100).map(|i| Some(if i < 90 { "a" } else { "b" }.to_owned())).collect();
    let ds = gen::dataset(vec![gen::cat(labels)]);
    let v = exact_value(&ds, DescriptorKind::HeterogeneousFrequencies, Tuple::unary(0), &s).unwrap();
    let truth = oracle::normalized_entropy((0..100).map(|i| i < 90)).unwrap();
    let ok = (v.raw - 0.4690).abs() < 5e-5 && (v.strength - 0.5310).abs() < 5e-5 && oracle::rel_err(v.raw, truth) < 1e-12;
    out.push(example("entropy of {0.9, 0.1}", ok, format!("H_norm {:.4}, strength {:.4}", v.raw, v.strength)));

    let mut rng = ChaCha8Rng::seed_from_u64(175);
    let (x, y) = correlated(&mut rng, 10_000, 0.8);
    let truth = oracle::pearson(&x, &y).unwrap();
    let ds = numeric(vec![x, y]);
    let v = exact_value(&ds, DescriptorKind::LinearRelationship, Tuple::pair(0, 1), &s).unwrap().raw;
    out.push(example("pearson at population rho 0.8", (v - truth).abs() <= 0.02 && (v - 0.8).abs() <= 0.02, format!("{v:.4} vs oracle {truth:.4}")));

    let (x, y) = exact_pair(&mut rng, 5, 0.5);
    let ds = numeric(vec![x, y]);
    let adj = QuerySettings { metric: Metric::SignificanceAdjusted, alpha: Some(0.05), ..s };
    let v = exact_value(&ds, DescriptorKind::LinearRelationship, Tuple::pair(0, 1), &adj).unwrap();
    let p = match v.detail {
        Detail::Correlation { p_value, .. } => p_value.unwrap_or(f64::NAN),
        _ => f64::NAN,
    };
    let truth = oracle::p_value(0.5, 5);
    let ok = v.strength == 0.0 && (v.raw - 0.5).abs() < 1e-12 && (p - 0.39).abs() < 0.005 && oracle::rel_err(p, truth) < 1e-9;
    out.push(example("significance at n=5, rho=0.5", ok, format!("strength {}, p {p:.4}", v.strength)));
}

fn payload_examples(out: &mut Vec<Example>) {
    let mut rng = ChaCha8Rng::seed_from_u64(195);
    let draws = normals(&mut rng, 10_000);
    let (lo, hi) = draws.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let mut truth = vec![0u64; 20];
    for &v in &draws {
        truth[(((v - lo) / (hi - lo) * 20.0) as usize).min(19)] += 1;
    }
    let VisualizationPayload::Histogram { counts, .. } = guidepost_core::payload::histogram(&draws, 20) else {
        unreachable!()
    };
    let sum: u64 = counts.iter().sum();
    out.push(example("histogram of 1e4 normals", sum == 10_000 && counts == truth, format!("counts sum to {sum}")));

    let labels: Vec<Option<String>> = ["a", "a", "a", "b", "b", "c"].iter().map(|s| Some(s.to_string())).collect();
    let ds = gen::dataset(vec![gen::cat(labels)]);
    let top = Explorer::new(&ds).rank(&GuidepostQuery::new(DescriptorKind::HeterogeneousFrequencies)).unwrap();
    let ok = match &top[0].payload {
        VisualizationPayload::Pareto { categories, counts, cumulative } => {
            categories == &["a", "b", "c"]
                && counts == &[3, 2, 1]
                && (cumulative[0] - 0.5).abs() < 1e-12
                && (cumulative[1] - 5.0 / 6.0).abs() < 1e-12
                && cumulative[2] == 1.0
        }
        _ => false,
    };
    out.push(example("pareto of a,a,a,b,b,c", ok, format!("{:?}", top[0].payload)));
}

fn bundle_of(n: usize, d: usize, seed: u64) -> (usize, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = normals(&mut rng, n);
    let columns: Vec<(String, ColumnData)> = (0..d)
        .map(|c| {
            let w = c as f64 / d as f64;
            let noise = normals(&mut rng, n);
            let v: Vec<f64> = base.iter().zip(&noise).map(|(b, e)| w * b + e).collect();
            (format!("c{c}"), ColumnData::Numeric(NumericColumn::from_values(&v)))
        })
        .collect();
    let ds = guidepost_core::Dataset::from_columns(columns).unwrap();
    let bundle = build_bundle_parallel(&ds, &SketchConfig { k: 1024, ..SketchConfig::default() }).unwrap();
    let hyperplane: usize = bundle
        .columns()
        .iter()
        .filter_map(|c| c.numeric()?.hyperplane.as_ref())
        .map(|h| 16 * h.k() + h.bits().len() * 8)
        .sum();
    (encode_bundle(&bundle).len(), hyperplane)
}

/// Bound used for "a few megabytes".
const BUNDLE_LIMIT: usize = 8 << 20;

fn sketch_examples(out: &mut Vec<Example>) {
    let (big, hp_big) = bundle_of(1_000_000, 50, 282);
    let (small, hp_small) = bundle_of(100_000, 50, 283);
    out.push(example(
        "bundle size at n=1e6, d=50, k=1024",
        big <= BUNDLE_LIMIT && hp_big == hp_small && big < small + small / 2,
        format!("{:.2} MiB (n=1e5: {:.2} MiB; signatures {:.2} MiB at both sizes)", big as f64 / 1048576.0, small as f64 / 1048576.0, hp_big as f64 / 1048576.0),
    ));

    let mut rng = ChaCha8Rng::seed_from_u64(292);
    let (x, y) = correlated(&mut rng, 10_000, 0.8);
    let exact = oracle::pearson(&x, &y).unwrap();
    let present = vec![true; x.len()];
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let inputs = [
        HyperplaneInput { values: &x, present: &present, mean: mean(&x), complete: true },
        HyperplaneInput { values: &y, present: &present, mean: mean(&y), complete: true },
    ];
    let good = (0..1000u64)
        .filter(|&seed| {
            let s = build_signatures(1024, seed, 0, &inputs);
            (approx_pearson(&s[0], &s[1]).unwrap() - exact).abs() <= 0.075
        })
        .count();
    out.push(example("hyperplane estimate at rho 0.8 over 1000 seeds", good >= 990, format!("{good}/1000 within 0.075")));

    let mut q = QuantileSketch::new(0.01, 1000);
    (1..=1000).for_each(|v| q.push(f64::from(v)));
    let m = q.quantile(0.5).unwrap();
    out.push(example("median of the stream 1..1000", (490.0..=510.0).contains(&m), format!("{m}")));

    let (eps, n) = (0.005, 50_000usize);
    let mut rng = ChaCha8Rng::seed_from_u64(310);
    let data: Vec<f64> = (0..n).map(|_| rng.gen()).collect();
    let mut q = QuantileSketch::new(eps, n as u64);
    data.iter().for_each(|&v| q.push(v));
    let est = estimate_outlier_count(&q).unwrap().strength;
    let truth = oracle::outliers(&data).unwrap().0;
    out.push(example("outlier estimate on uniform data", truth == 0 && est <= 4.0 * eps * n as f64, format!("estimate {est}, exact {truth}")));

    let (eps, n) = (0.001, 100_000usize);
    let mut rng = ChaCha8Rng::seed_from_u64(311);
    let data: Vec<f64> =
        (0..n).map(|_| if rng.gen_bool(0.01) { 100.0 } else { f64::from(rng.gen_range(1..=4)) }).collect();
    let mut q = QuantileSketch::new(eps, n as u64);
    data.iter().for_each(|&v| q.push(v));
    let est = estimate_outlier_count(&q).unwrap().strength;
    let truth = oracle::outliers(&data).unwrap().0 as f64;
    out.push(example("outlier estimate with 1% planted extremes", (est - truth).abs() <= 0.004 * truth, format!("estimate {est}, exact {truth}")));

    let data: Vec<u64> = (0..1000).map(|i| u64::from(i % 10 == 0)).collect();
    let h = entropy_sketch(&data, 256, 4096);
    out.push(example("entropy sketch of {0.9, 0.1}", (h - 0.4690).abs() < 5e-5, format!("{h:.4}")));

    let mut rng = ChaCha8Rng::seed_from_u64(322);
    let zipf = Zipf::new(10_000, 1.1).unwrap();
    let data: Vec<u64> = (0..200_000).map(|_| zipf.sample(&mut rng) as u64).collect();
    let h = entropy_sketch(&data, 256, 4096);
    let truth = oracle::normalized_entropy(data.iter().copied()).unwrap();
    out.push(example("entropy sketch of Zipf(1.1)", (h - truth).abs() <= 0.05, format!("{h:.4} vs exact {truth:.4}")));

    let mut rng = ChaCha8Rng::seed_from_u64(331);
    let mut worst: f64 = 0.0;
    for (n, scale, shift) in [(1_000usize, 1.0, 0.0), (100_000, 1e3, 0.0), (1_000_000, 1e6, 0.0), (1_000_000, 1e5, 5e5)] {
        let data: Vec<f64> = (0..n).map(|_| shift + rng.gen_range(-scale..scale) * rng.gen::<f64>()).collect();
        let m = moments_to_metrics(&data.iter().copied().collect::<MomentSketch>()).unwrap();
        let mean = data.iter().sum::<f64>() / n as f64;
        let sd = (data.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
        worst = worst
            .max((m.mean - mean).abs() / sd)
            .max(oracle::rel_err(m.std_dev, sd))
            .max((m.skewness.unwrap() - oracle::skewness(&data).unwrap()).abs())
            .max(oracle::rel_err(m.kurtosis.unwrap(), oracle::kurtosis(&data).unwrap()));
    }
    out.push(example("moments from power sums vs two-pass", worst <= 1e-6, format!("worst relative error {worst:.2e}")));
}

fn entropy_sketch(data: &[u64], s: usize, r: usize) -> f64 {
    let mut heavy = MisraGries::new(s);
    let mut sample = ReservoirBuilder::new(r, 7);
    for (row, &v) in data.iter().enumerate() {
        heavy.update(v);
        sample.offer(row as u64, v);
    }
    let distinct = data.iter().collect::<std::collections::BTreeSet<_>>().len() as u64;
    let sample = sample.finish();
    estimate_entropy(&heavy, sample.values().copied(), distinct).unwrap().raw
}

fn engine_examples(out: &mut Vec<Example>) {
    let mut rng = ChaCha8Rng::seed_from_u64(412);
    let a = normals(&mut rng, 500);
    let c = normals(&mut rng, 500);
    let ds = numeric(vec![a.clone(), a, c]);
    let ex = Explorer::new(&ds);
    let top = ex.rank(&GuidepostQuery::new(DescriptorKind::LinearRelationship)).unwrap();
    out.push(example("copied column tops the ranking", top[0].tuple == Tuple::pair(0, 1) && top[0].value.strength == 1.0, format!("{:?}", top[0].columns)));
    let asc = ex.rank(&GuidepostQuery::new(DescriptorKind::LinearRelationship).order(Order::Ascending)).unwrap();
    let ok = asc[0].tuple == Tuple::pair(0, 2) || asc[0].tuple == Tuple::pair(1, 2);
    out.push(example("ascending order puts the noise pair first", ok, format!("{:?}", asc[0].columns)));

    let mut rng = ChaCha8Rng::seed_from_u64(424);
    let (x, z) = exact_pair(&mut rng, 2000, 0.9);
    let w = gen::partner(&mut rng, &x, 0.2);
    let y = normals(&mut rng, 2000);
    let ds = numeric(vec![x, y, z, w]);
    let ex = Explorer::new(&ds);
    let focus = crate::ranking::id_of(&ds, DescriptorKind::LinearRelationship, &Tuple::pair(0, 1));
    let n = ex.related(&focus, 10, &QuerySettings::default()).unwrap();
    let order: Vec<Tuple> = n.fixed_first.iter().map(|g| g.tuple.clone()).collect();
    let rz = oracle::pearson(&present(&ds, 0), &present(&ds, 2)).unwrap();
    let rw = oracle::pearson(&present(&ds, 0), &present(&ds, 3)).unwrap();
    let ok = order == vec![Tuple::pair(0, 2), Tuple::pair(0, 3)] && rz > rw;
    out.push(example("neighbourhood order follows planted rho", ok, format!("{order:?} (rho {rz:.3} > {rw:.3})")));

    let mut rng = ChaCha8Rng::seed_from_u64(433);
    let cols: Vec<Vec<f64>> = (0..5).map(|i| normals(&mut rng, 300).into_iter().map(|v| v.powi(1 + i % 3)).collect()).collect();
    let ds = numeric(cols.clone());
    let ok = match Explorer::new(&ds).overview(DescriptorKind::Skew, Mode::Exact).unwrap() {
        Overview::Vector { strengths, .. } => {
            strengths.len() == 5
                && strengths.iter().zip(&cols).all(|(s, c)| oracle::rel_err(s.unwrap(), oracle::skewness(c).unwrap().abs()) < 1e-9)
        }
        _ => false,
    };
    out.push(example("skew overview over 5 columns", ok, "5 entries"));
}

fn present(ds: &guidepost_core::Dataset, c: usize) -> Vec<f64> {
    ds.numeric(c).unwrap().present_values()
}

fn interface_examples(out: &mut Vec<Example>) {
    let dir = tempfile::tempdir().unwrap();
    let reg = dir.path();
    let id = parity::ingest(reg, &parity::abc_csv(300));
    let (status, body) = parity::service_get(reg, &format!("/datasets/{id}/guideposts?descriptor=linear_relationship&k=3"));
    let v: serde_json::Value = serde_json::from_str(&body).unwrap_or_default();
    let ok = status == 200 && v[0]["columns"] == serde_json::json!(["a", "b"]) && v[0]["value"]["strength"] == 1.0;
    out.push(example("service top pair on the a/b/c fixture", ok, format!("status {status}, first {}", v[0]["columns"])));

    let body = parity::cli(reg, &["rank", &id, "--descriptor", "outliers", "--k", "3"]);
    let v: serde_json::Value = serde_json::from_str(&body).unwrap_or_default();
    let values = v[0]["payload"]["outliers"].as_array().cloned().unwrap_or_default();
    let ok = v[0]["columns"] == serde_json::json!(["spike"]) && !values.is_empty() && values.iter().all(|o| o == 100.0);
    out.push(example("cli outlier guidepost lists 100", ok, format!("{} with outliers {values:?}", v[0]["columns"])));
}

pub fn run() -> Vec<Example> {
    let mut out = Vec::new();
    table_examples(&mut out);
    metric_examples(&mut out);
    payload_examples(&mut out);
    engine_examples(&mut out);
    interface_examples(&mut out);
    sketch_examples(&mut out);
    out
}
