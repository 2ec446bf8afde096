use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::descriptors::{self, compare_strength, DescriptorKind, Detail, Exclusion, Order, StrengthValue};
use crate::engine::instances::{domain, enumerate_instances, InstanceSet};
use crate::engine::{
    guidepost_id, EngineConfig, EngineError, Guidepost, GuidepostQuery, Metric, Mode, NeighborhoodResult, Overview,
    QuerySettings, Tuple,
};
use crate::payload::{self, VisualizationPayload};
use crate::sketch::estimate::{self, approx_histogram, estimate_distinct, estimate_entropy, tukey_summary};
use crate::sketch::reservoir::{row_priority, sample_rows};
use crate::sketch::{approx_pearson, ColumnSketch, NumericSketch, SketchBundle};
use crate::table::{ColumnData, Dataset, NumericColumn};

/// Query entry point over one dataset and, optionally, its sketch bundle.
/// Cheap to construct; holds only references.
#[derive(Debug, Clone, Copy)]
pub struct Explorer<'a> {
    dataset: &'a Dataset,
    bundle: Option<&'a SketchBundle>,
    config: EngineConfig,
}

#[derive(Clone, Copy)]
enum Source<'a> {
    Exact,
    Sketch(&'a SketchBundle),
}

type Scored = (Tuple, StrengthValue);

impl<'a> Explorer<'a> {
    pub fn new(dataset: &'a Dataset) -> Self {
        Self { dataset, bundle: None, config: EngineConfig::default() }
    }

    pub fn with_bundle(mut self, bundle: Option<&'a SketchBundle>) -> Self {
        self.bundle = bundle;
        self
    }

    pub fn with_config(mut self, config: EngineConfig) -> Self {
        self.config = config;
        self
    }

    pub fn dataset(&self) -> &'a Dataset {
        self.dataset
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn instances(&self, descriptor: DescriptorKind) -> InstanceSet {
        enumerate_instances(self.dataset, descriptor)
    }

    fn source(&self, mode: Mode) -> Result<Source<'a>, EngineError> {
        match mode {
            Mode::Exact => Ok(Source::Exact),
            Mode::Approximate => {
                let bundle = self.bundle.ok_or(EngineError::BundleNotReady)?;
                if !bundle.matches(self.dataset) {
                    return Err(EngineError::StaleBundle);
                }
                Ok(Source::Sketch(bundle))
            }
        }
    }

    /// Strength of one instance under `settings`. The outer error is a
    /// query problem; the inner one an excluded instance.
    pub fn evaluate(
        &self,
        descriptor: DescriptorKind,
        tuple: &Tuple,
        settings: &QuerySettings,
    ) -> Result<Result<StrengthValue, Exclusion>, EngineError> {
        settings.validate(descriptor)?;
        let source = self.source(settings.mode)?;
        Ok(self.eval(source, descriptor, tuple, settings))
    }

    fn eval(&self, source: Source<'_>, descriptor: DescriptorKind, tuple: &Tuple, settings: &QuerySettings) -> Result<StrengthValue, Exclusion> {
        let value = match (source, tuple.indices()) {
            (Source::Exact, &[c]) => self.exact_unary(descriptor, c),
            (Source::Exact, &[x, y]) => self.exact_pair(x, y),
            (Source::Sketch(b), &[c]) => sketch_unary(b, descriptor, c),
            (Source::Sketch(b), &[x, y]) => sketch_pair(b, x, y),
            _ => Err(Exclusion::TooFewValues),
        }?;
        match settings.metric {
            Metric::SignificanceAdjusted => descriptors::adjust_for_significance(value, settings.alpha()),
            Metric::Preferred => Ok(value),
        }
    }

    fn numeric(&self, column: usize) -> Option<&'a NumericColumn> {
        self.dataset.numeric(column)
    }

    fn exact_unary(&self, descriptor: DescriptorKind, column: usize) -> Result<StrengthValue, Exclusion> {
        let col = self.dataset.column(column).ok_or(Exclusion::NoSketch)?;
        if descriptor == DescriptorKind::HeterogeneousFrequencies {
            return match &col.data {
                ColumnData::Categorical(c) => descriptors::heterogeneity(&c.counts()),
                ColumnData::Numeric(n) => descriptors::heterogeneity(&descriptors::integer_counts(&n.present_values())),
            };
        }
        let values = col.numeric().ok_or(Exclusion::NoSketch)?.present_values();
        if values.is_empty() {
            return Err(Exclusion::TooFewValues);
        }
        match descriptor {
            DescriptorKind::Dispersion => descriptors::qcd(&values),
            DescriptorKind::Skew => descriptors::skewness(&values),
            DescriptorKind::HeavyTails => descriptors::kurtosis(&values),
            DescriptorKind::Outliers => descriptors::tukey_outliers(&values),
            _ => Err(Exclusion::NoSketch),
        }
    }

    fn exact_pair(&self, x: usize, y: usize) -> Result<StrengthValue, Exclusion> {
        let (Some(cx), Some(cy)) = (self.numeric(x), self.numeric(y)) else {
            return Err(Exclusion::NoSketch);
        };
        let complete = |i: usize| self.dataset.columns()[i].meta.missing_count == 0;
        if complete(x) && complete(y) {
            descriptors::pearson(cx.raw(), cy.raw())
        } else {
            let (a, b) = descriptors::pairwise_complete(cx.iter(), cy.iter());
            descriptors::pearson(&a, &b)
        }
    }

    /// Every admissible instance with its strength, in tuple order.
    pub fn scores(&self, descriptor: DescriptorKind, settings: &QuerySettings) -> Result<Vec<Scored>, EngineError> {
        settings.validate(descriptor)?;
        let source = self.source(settings.mode)?;
        Ok(self.scores_from(source, descriptor, settings, self.instances(descriptor).admissible().cloned()))
    }

    fn scores_from(
        &self,
        source: Source<'_>,
        descriptor: DescriptorKind,
        settings: &QuerySettings,
        tuples: impl Iterator<Item = Tuple>,
    ) -> Vec<Scored> {
        tuples
            .filter_map(|t| {
                let v = self.eval(source, descriptor, &t, settings).ok()?;
                Some((t, v))
            })
            .collect()
    }

    /// Top `k` guideposts for the query.
    pub fn rank(&self, query: &GuidepostQuery) -> Result<Vec<Guidepost>, EngineError> {
        query.validate()?;
        let source = self.source(query.settings.mode)?;
        let tuples = self.instances(query.descriptor).admissible().cloned().collect::<Vec<_>>();
        let scored = self.scores_from(source, query.descriptor, &query.settings, tuples.into_iter());
        let order = query.settings.order_for(query.descriptor);
        let top = select(scored, &query.settings, order, query.k);
        Ok(top
            .into_iter()
            .map(|(t, v)| self.build(source, query.descriptor, query.settings.metric, t, v))
            .collect())
    }

    /// Looks up the instance behind a guidepost id.
    pub fn resolve(&self, id: &str) -> Result<(DescriptorKind, Tuple), EngineError> {
        let ds = self.dataset.id();
        for descriptor in DescriptorKind::ALL {
            let cols = domain(self.dataset, descriptor);
            if descriptor.arity() == 1 {
                for &c in &cols {
                    let t = Tuple::unary(c);
                    if guidepost_id(ds, descriptor, &t) == id {
                        return Ok((descriptor, t));
                    }
                }
            } else {
                for (a, &i) in cols.iter().enumerate() {
                    for &j in &cols[a + 1..] {
                        let t = Tuple::pair(i, j);
                        if guidepost_id(ds, descriptor, &t) == id {
                            return Ok((descriptor, t));
                        }
                    }
                }
            }
        }
        Err(EngineError::UnknownGuidepost(String::from(id)))
    }

    /// The guidepost behind an id, evaluated under `settings`.
    pub fn guidepost(&self, id: &str, settings: &QuerySettings) -> Result<Guidepost, EngineError> {
        let (descriptor, tuple) = self.resolve(id)?;
        settings.validate(descriptor)?;
        let source = self.source(settings.mode)?;
        let value = self
            .eval(source, descriptor, &tuple, settings)
            .map_err(EngineError::FocusNotAdmissible)?;
        Ok(self.build(source, descriptor, settings.metric, tuple, value))
    }

    /// Pair guideposts sharing an attribute with the focus. `settings` are
    /// the pair-ranking settings (metric, order, filter, mode); a unary
    /// focus on `x` yields the pairs `(x, y)`.
    pub fn related(&self, focus: &str, k: usize, settings: &QuerySettings) -> Result<NeighborhoodResult, EngineError> {
        let pair = DescriptorKind::LinearRelationship;
        if k == 0 {
            return Err(EngineError::InvalidQuery(String::from("k must be at least 1")));
        }
        settings.validate(pair)?;
        let (descriptor, tuple) = self.resolve(focus)?;
        let source = self.source(settings.mode)?;
        let focus_settings = if descriptor == pair {
            *settings
        } else {
            QuerySettings { mode: settings.mode, ..QuerySettings::default() }
        };
        self.eval(source, descriptor, &tuple, &focus_settings)
            .map_err(EngineError::FocusNotAdmissible)?;

        let numeric = domain(self.dataset, pair);
        let (x, y) = match *tuple.indices() {
            [x] => (x, None),
            [x, y] => (x, Some(y)),
            _ => unreachable!("tuples have one or two members"),
        };
        let order = settings.order_for(pair);
        let around = |fixed: usize, other: Option<usize>| -> Vec<Scored> {
            if !numeric.contains(&fixed) {
                return Vec::new();
            }
            let tuples = numeric
                .iter()
                .filter(|&&c| c != fixed && Some(c) != other)
                .map(|&c| Tuple::pair(fixed, c));
            let scored = self.scores_from(source, pair, settings, tuples);
            select(scored, settings, order, usize::MAX)
        };
        let first = around(x, y);
        let second = y.map(|y| around(y, Some(x))).unwrap_or_default();
        let mut union: Vec<Scored> = first.iter().chain(&second).cloned().collect();
        sort_scored(&mut union, order);
        let build = |list: Vec<Scored>| -> Vec<Guidepost> {
            list.into_iter()
                .take(k)
                .map(|(t, v)| self.build(source, pair, settings.metric, t, v))
                .collect()
        };
        Ok(NeighborhoodResult {
            focus: String::from(focus),
            focus_tuple: tuple,
            fixed_first: build(first),
            fixed_second: build(second),
            combined: build(union),
        })
    }

    /// Strengths over a descriptor's whole domain.
    pub fn overview(&self, descriptor: DescriptorKind, mode: Mode) -> Result<Overview, EngineError> {
        let source = self.source(mode)?;
        let columns = domain(self.dataset, descriptor);
        if mode == Mode::Exact && columns.len() > self.config.exact_overview_columns {
            return Err(EngineError::OverviewTooLarge {
                columns: columns.len(),
                limit: self.config.exact_overview_columns,
            });
        }
        let settings = QuerySettings { mode, ..QuerySettings::default() };
        let names = columns.iter().map(|&c| self.dataset.columns()[c].meta.name.clone()).collect();
        let strength = |t: &Tuple| self.eval(source, descriptor, t, &settings).ok().map(|v| v.strength);
        if descriptor.arity() == 1 {
            let strengths = columns.iter().map(|&c| strength(&Tuple::unary(c))).collect();
            return Ok(Overview::Vector { descriptor, mode, columns, names, strengths });
        }
        let m = columns.len();
        let mut strengths = alloc::vec![alloc::vec![None; m]; m];
        for a in 0..m {
            for b in a + 1..m {
                let s = strength(&Tuple::pair(columns[a], columns[b]));
                strengths[a][b] = s;
                strengths[b][a] = s;
            }
        }
        Ok(Overview::Matrix { descriptor, mode, columns, names, strengths })
    }

    fn build(&self, source: Source<'_>, descriptor: DescriptorKind, metric: Metric, tuple: Tuple, value: StrengthValue) -> Guidepost {
        let payload = match source {
            Source::Exact => self.exact_payload(descriptor, &tuple, &value),
            Source::Sketch(b) => self.sketch_payload(b, descriptor, &tuple, &value),
        };
        Guidepost {
            id: guidepost_id(self.dataset.id(), descriptor, &tuple),
            descriptor,
            columns: tuple.indices().iter().map(|&c| self.dataset.columns()[c].meta.name.clone()).collect(),
            tuple,
            metric,
            value,
            chart: descriptor.chart(),
            payload,
            approximate: matches!(source, Source::Sketch(_)),
        }
    }

    fn exact_payload(&self, descriptor: DescriptorKind, tuple: &Tuple, value: &StrengthValue) -> VisualizationPayload {
        let cfg = &self.config;
        match (descriptor, tuple.indices()) {
            (DescriptorKind::LinearRelationship, &[x, y]) => {
                let (cx, cy) = (self.numeric(x).expect("numeric"), self.numeric(y).expect("numeric"));
                let rows: Vec<u64> = cx
                    .iter()
                    .zip(cy.iter())
                    .enumerate()
                    .filter(|(_, (a, b))| a.is_some() && b.is_some())
                    .map(|(r, _)| r as u64)
                    .collect();
                let rows = if rows.len() <= cfg.scatter_points {
                    rows
                } else {
                    sample_rows(cfg.sample_seed, cfg.scatter_points, rows.into_iter())
                };
                let points = rows
                    .iter()
                    .map(|&r| [cx.raw()[r as usize], cy.raw()[r as usize]])
                    .collect();
                let (slope, intercept) = line(value);
                payload::scatter(points, slope, intercept)
            }
            (DescriptorKind::HeterogeneousFrequencies, &[c]) => {
                let col = &self.dataset.columns()[c];
                let items: Vec<(String, u64)> = match &col.data {
                    ColumnData::Categorical(cat) => cat
                        .counts()
                        .into_iter()
                        .enumerate()
                        .map(|(code, n)| (String::from(cat.label(code as u32)), n))
                        .collect(),
                    ColumnData::Numeric(num) => {
                        let mut counts: BTreeMap<i64, u64> = BTreeMap::new();
                        num.iter().flatten().for_each(|v| *counts.entry(v as i64).or_insert(0) += 1);
                        counts.into_iter().map(|(k, n)| (k.to_string(), n)).collect()
                    }
                };
                let total = items.iter().map(|(_, n)| n).sum();
                payload::pareto(items, total, cfg.pareto_bars)
            }
            (DescriptorKind::Outliers, &[c]) => {
                payload::boxplot(&self.numeric(c).expect("numeric").present_values(), cfg.outlier_values)
            }
            (_, &[c]) => payload::histogram(&self.numeric(c).expect("numeric").present_values(), cfg.histogram_bins),
            _ => unreachable!("tuple arity matches descriptor"),
        }
    }

    fn sketch_payload(
        &self,
        bundle: &SketchBundle,
        descriptor: DescriptorKind,
        tuple: &Tuple,
        value: &StrengthValue,
    ) -> VisualizationPayload {
        let cfg = &self.config;
        let numeric = |c: usize| bundle.column(c).and_then(ColumnSketch::numeric).expect("evaluated column has a sketch");
        match (descriptor, tuple.indices()) {
            (DescriptorKind::LinearRelationship, &[x, y]) => {
                let (sx, sy) = (numeric(x), numeric(y));
                let mut joined = join_samples(sx, sy);
                if joined.len() > cfg.scatter_points {
                    let seed = bundle.config().seed;
                    joined.sort_by_key(|(r, _)| row_priority(seed, *r));
                    joined.truncate(cfg.scatter_points);
                    joined.sort_by_key(|(r, _)| *r);
                }
                let (slope, intercept) = line(value);
                payload::scatter(joined.into_iter().map(|(_, p)| p).collect(), slope, intercept)
            }
            (DescriptorKind::HeterogeneousFrequencies, &[c]) => match bundle.column(c) {
                Some(ColumnSketch::Categorical(s)) => payload::pareto(s.heavy.items(), s.count, cfg.pareto_bars),
                Some(ColumnSketch::Numeric(s)) => {
                    let items = s
                        .frequencies
                        .as_ref()
                        .map(|f| f.heavy.items().into_iter().map(|(k, n)| (k.to_string(), n)).collect())
                        .unwrap_or_default();
                    payload::pareto(items, s.count(), cfg.pareto_bars)
                }
                _ => unreachable!("evaluated column has a sketch"),
            },
            (DescriptorKind::Outliers, &[c]) => {
                let s = numeric(c);
                let summary = tukey_summary(&s.quantiles.view());
                let flagged = s.reservoir.values().copied().filter(|&v| summary.is_outlier(v)).collect();
                let mut chart = payload::boxplot_from_summary(&summary, flagged, cfg.outlier_values);
                if let VisualizationPayload::BoxPlot { outlier_total, .. } = &mut chart {
                    *outlier_total = value.strength as u64;
                }
                chart
            }
            (_, &[c]) => approx_histogram(&numeric(c).quantiles, cfg.histogram_bins),
            _ => unreachable!("tuple arity matches descriptor"),
        }
    }
}

fn line(value: &StrengthValue) -> (f64, f64) {
    match value.detail {
        Detail::Correlation { slope, intercept, .. } => (slope, intercept),
        _ => (0.0, 0.0),
    }
}

/// Sample rows present in both reservoirs, in row order.
fn join_samples(x: &NumericSketch, y: &NumericSketch) -> Vec<(u64, [f64; 2])> {
    let (a, b) = (x.reservoir.entries(), y.reservoir.entries());
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            core::cmp::Ordering::Less => i += 1,
            core::cmp::Ordering::Greater => j += 1,
            core::cmp::Ordering::Equal => {
                out.push((a[i].0, [a[i].1, b[j].1]));
                i += 1;
                j += 1;
            }
        }
    }
    out
}

fn sketch_unary(bundle: &SketchBundle, descriptor: DescriptorKind, column: usize) -> Result<StrengthValue, Exclusion> {
    let cap = bundle.config().cardinality_cap;
    match bundle.column(column) {
        None => Err(Exclusion::NoSketch),
        Some(ColumnSketch::Absent) => Err(match descriptor {
            DescriptorKind::HeterogeneousFrequencies => Exclusion::SingleCategory,
            _ => Exclusion::TooFewValues,
        }),
        Some(ColumnSketch::Categorical(s)) => match descriptor {
            DescriptorKind::HeterogeneousFrequencies => {
                let distinct = s
                    .distinct
                    .exact()
                    .unwrap_or_else(|| estimate_distinct(s.reservoir.values().cloned(), cap));
                estimate_entropy(&s.heavy, s.reservoir.values().cloned(), distinct)
            }
            _ => Err(Exclusion::NoSketch),
        },
        Some(ColumnSketch::Numeric(s)) => match descriptor {
            DescriptorKind::Dispersion => estimate::approx_qcd(&s.quantiles),
            DescriptorKind::Skew => s.moments.skewness(),
            DescriptorKind::HeavyTails => s.moments.kurtosis(),
            DescriptorKind::Outliers => estimate::estimate_outlier_count(&s.quantiles),
            DescriptorKind::HeterogeneousFrequencies => {
                let f = s.frequencies.as_ref().ok_or(Exclusion::NoSketch)?;
                let sample = || s.reservoir.values().map(|&v| v as i64);
                let distinct = f.distinct.exact().unwrap_or_else(|| estimate_distinct(sample(), cap));
                estimate_entropy(&f.heavy, sample(), distinct)
            }
            DescriptorKind::LinearRelationship => Err(Exclusion::NoSketch),
        },
    }
}

fn sketch_pair(bundle: &SketchBundle, x: usize, y: usize) -> Result<StrengthValue, Exclusion> {
    let numeric = |c: usize| match bundle.column(c) {
        Some(ColumnSketch::Numeric(s)) => Ok(&**s),
        Some(ColumnSketch::Absent) => Err(Exclusion::TooFewValues),
        _ => Err(Exclusion::NoSketch),
    };
    let (sx, sy) = (numeric(x)?, numeric(y)?);
    if sx.count() < 3 || sy.count() < 3 {
        return Err(Exclusion::TooFewValues);
    }
    let (Some(hx), Some(hy)) = (sx.signature(), sy.signature()) else {
        return Err(Exclusion::Constant);
    };
    let rho = approx_pearson(hx, hy).map_err(|_| Exclusion::NoSketch)?;
    let (mx, my) = match (sx.moments.metrics(), sy.moments.metrics()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Exclusion::TooFewValues),
    };
    let slope = rho * my.std_dev / mx.std_dev;
    Ok(StrengthValue {
        raw: rho,
        strength: rho.abs(),
        detail: Detail::Correlation {
            n: sx.count().min(sy.count()),
            slope,
            intercept: my.mean - slope * mx.mean,
            p_value: None,
        },
    })
}

fn sort_scored(list: &mut [Scored], order: Order) {
    list.sort_by(|a, b| compare_strength(a.1.strength, b.1.strength, order).then_with(|| a.0.cmp(&b.0)));
}

/// Filter, order (ties by tuple) and keep the first `k`.
fn select(mut scored: Vec<Scored>, settings: &QuerySettings, order: Order, k: usize) -> Vec<Scored> {
    scored.retain(|(_, v)| settings.admits(v.strength));
    sort_scored(&mut scored, order);
    scored.truncate(k);
    scored
}
