//! Query parameters shared by the CLI and the HTTP API, and the calls they
//! drive. Both front ends parse into these structs, so a logical query has
//! exactly one evaluation path.

use std::str::FromStr;

use guidepost_core::descriptors::Order;
use guidepost_core::engine::{Guidepost, NeighborhoodResult, Overview};
use guidepost_core::table::{CompareOp, RowPage, RowPredicate, RowQuery};
use guidepost_core::{Dataset, DescriptorKind, EngineError, Explorer, GuidepostQuery, Metric, Mode, QuerySettings};
use serde::{Deserialize, Serialize};

use crate::Error;

fn parse<T: FromStr>(what: &str, value: &str) -> Result<T, EngineError> {
    value.parse().map_err(|_| EngineError::InvalidQuery(format!("unknown {what} {value:?}")))
}

/// Ranking controls common to every guidepost list.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SettingsParams {
    pub metric: Option<String>,
    pub order: Option<String>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub mode: Option<String>,
    pub alpha: Option<f64>,
}

impl SettingsParams {
    pub fn settings(&self) -> Result<QuerySettings, EngineError> {
        Ok(QuerySettings {
            metric: self.metric.as_deref().map(|m| parse::<Metric>("metric", m)).transpose()?.unwrap_or_default(),
            order: self.order.as_deref().map(|o| parse::<Order>("order", o)).transpose()?,
            min: self.min,
            max: self.max,
            mode: self.mode.as_deref().map(|m| parse::<Mode>("mode", m)).transpose()?.unwrap_or_default(),
            alpha: self.alpha,
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RankParams {
    pub descriptor: Option<String>,
    pub k: Option<usize>,
    pub metric: Option<String>,
    pub order: Option<String>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub mode: Option<String>,
    pub alpha: Option<f64>,
}

impl RankParams {
    pub fn query(&self) -> Result<GuidepostQuery, EngineError> {
        let descriptor = self
            .descriptor
            .as_deref()
            .ok_or_else(|| EngineError::InvalidQuery("descriptor is required".into()))?;
        let settings = SettingsParams {
            metric: self.metric.clone(),
            order: self.order.clone(),
            min: self.min,
            max: self.max,
            mode: self.mode.clone(),
            alpha: self.alpha,
        }
        .settings()?;
        let query = GuidepostQuery {
            descriptor: parse::<DescriptorKind>("descriptor", descriptor)?,
            k: self.k.unwrap_or(GuidepostQuery::DEFAULT_K),
            settings,
        };
        query.validate()?;
        Ok(query)
    }

    pub fn mode(&self) -> Mode {
        self.mode.as_deref().and_then(|m| m.parse().ok()).unwrap_or_default()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelatedParams {
    pub k: Option<usize>,
    pub metric: Option<String>,
    pub order: Option<String>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub mode: Option<String>,
    pub alpha: Option<f64>,
}

impl RelatedParams {
    pub fn settings(&self) -> Result<QuerySettings, EngineError> {
        SettingsParams {
            metric: self.metric.clone(),
            order: self.order.clone(),
            min: self.min,
            max: self.max,
            mode: self.mode.clone(),
            alpha: self.alpha,
        }
        .settings()
    }

    pub fn mode(&self) -> Mode {
        self.mode.as_deref().and_then(|m| m.parse().ok()).unwrap_or_default()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverviewParams {
    pub descriptor: Option<String>,
    pub mode: Option<String>,
}

impl OverviewParams {
    pub fn parsed(&self) -> Result<(DescriptorKind, Mode), EngineError> {
        let descriptor = self
            .descriptor
            .as_deref()
            .ok_or_else(|| EngineError::InvalidQuery("descriptor is required".into()))?;
        let mode = self.mode.as_deref().map(|m| parse::<Mode>("mode", m)).transpose()?.unwrap_or_default();
        Ok((parse("descriptor", descriptor)?, mode))
    }
}

pub const DEFAULT_ROW_LIMIT: usize = 100;

/// Raw-row access. `op` is one of `eq`, `gt`, `ge`, `lt`, `le`, `between`
/// or `outside`; the last two take `value=lo,hi`. `columns` is a
/// comma-separated projection.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RowParams {
    pub col: Option<usize>,
    pub op: Option<String>,
    pub value: Option<String>,
    pub columns: Option<String>,
    pub limit: Option<usize>,
    pub offset: Option<usize>,
}

impl RowParams {
    pub fn query(&self) -> Result<RowQuery, EngineError> {
        let bad = |m: &str| EngineError::InvalidQuery(format!("malformed predicate: {m}"));
        let number = |v: &str| v.trim().parse::<f64>().map_err(|_| bad("value is not a number"));
        let filter = match (self.col, self.op.as_deref(), self.value.as_deref()) {
            (None, None, None) => None,
            (Some(column), Some(op), Some(value)) => Some(match op {
                "eq" => RowPredicate::Equals { column, value: value.to_owned() },
                "gt" | "ge" | "lt" | "le" => {
                    let op = match op {
                        "gt" => CompareOp::Gt,
                        "ge" => CompareOp::Ge,
                        "lt" => CompareOp::Lt,
                        _ => CompareOp::Le,
                    };
                    RowPredicate::Compare { column, op, value: number(value)? }
                }
                "between" | "outside" => {
                    let (lo, hi) = value.split_once(',').ok_or_else(|| bad("range needs lo,hi"))?;
                    let (lo, hi) = (number(lo)?, number(hi)?);
                    if op == "between" {
                        RowPredicate::Between { column, lo, hi }
                    } else {
                        RowPredicate::Outside { column, lo, hi }
                    }
                }
                other => return Err(bad(&format!("unknown op {other:?}"))),
            }),
            _ => return Err(bad("col, op and value go together")),
        };
        let projection = match self.columns.as_deref() {
            None | Some("") => Vec::new(),
            Some(list) => list
                .split(',')
                .map(|c| c.trim().parse::<usize>().map_err(|_| bad("columns must be indices")))
                .collect::<Result<_, _>>()?,
        };
        Ok(RowQuery {
            filter,
            projection,
            limit: self.limit.unwrap_or(DEFAULT_ROW_LIMIT),
            offset: self.offset.unwrap_or(0),
        })
    }
}

pub fn rank(explorer: &Explorer<'_>, params: &RankParams) -> Result<Vec<Guidepost>, Error> {
    Ok(explorer.rank(&params.query()?)?)
}

pub fn related(explorer: &Explorer<'_>, focus: &str, params: &RelatedParams) -> Result<NeighborhoodResult, Error> {
    let k = params.k.unwrap_or(GuidepostQuery::DEFAULT_K);
    Ok(explorer.related(focus, k, &params.settings()?)?)
}

pub fn overview(explorer: &Explorer<'_>, params: &OverviewParams) -> Result<Overview, Error> {
    let (descriptor, mode) = params.parsed()?;
    Ok(explorer.overview(descriptor, mode)?)
}

pub fn rows(dataset: &Dataset, params: &RowParams) -> Result<RowPage, Error> {
    Ok(dataset.get_rows(&params.query()?)?)
}
