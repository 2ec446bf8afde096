use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::descriptors::{DescriptorKind, Order, UnknownName};
use crate::engine::EngineError;

/// Significance level used when the adjusted metric is chosen without one.
pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Exact,
    #[serde(alias = "approx")]
    Approximate,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Approximate => "approximate",
        }
    }
}

impl FromStr for Mode {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(Mode::Exact),
            "approx" | "approximate" => Ok(Mode::Approximate),
            _ => Err(UnknownName),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// The descriptor's own ranking metric.
    #[default]
    Preferred,
    /// `|rho|` kept only when the correlation test is significant.
    SignificanceAdjusted,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Preferred => "preferred",
            Metric::SignificanceAdjusted => "significance_adjusted",
        }
    }
}

impl FromStr for Metric {
    type Err = UnknownName;

    /// Accepts `preferred`, `significance_adjusted`, or any descriptor's
    /// metric name (meaning the preferred metric).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "preferred" => Ok(Metric::Preferred),
            "significance_adjusted" | "significance" => Ok(Metric::SignificanceAdjusted),
            _ if DescriptorKind::ALL.iter().any(|k| k.metric_name() == s) => Ok(Metric::Preferred),
            _ => Err(UnknownName),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-descriptor ranking controls.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuerySettings {
    pub metric: Metric,
    /// `None` uses the descriptor's default order.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<Order>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
    pub mode: Mode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

impl QuerySettings {
    pub fn order_for(&self, descriptor: DescriptorKind) -> Order {
        self.order.unwrap_or_else(|| descriptor.default_order())
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(DEFAULT_ALPHA)
    }

    pub fn admits(&self, strength: f64) -> bool {
        self.min.map_or(true, |m| strength >= m) && self.max.map_or(true, |m| strength <= m)
    }

    pub fn validate(&self, descriptor: DescriptorKind) -> Result<(), EngineError> {
        if self.min.is_some_and(|v| !v.is_finite()) || self.max.is_some_and(|v| !v.is_finite()) {
            return Err(EngineError::InvalidQuery(String::from("filter bounds must be finite")));
        }
        if let (Some(lo), Some(hi)) = (self.min, self.max) {
            if lo > hi {
                return Err(EngineError::InvalidFilterRange);
            }
        }
        if self.metric == Metric::SignificanceAdjusted && descriptor != DescriptorKind::LinearRelationship {
            return Err(EngineError::InvalidQuery(alloc::format!(
                "metric significance_adjusted does not apply to {descriptor}"
            )));
        }
        if let Some(alpha) = self.alpha {
            if self.metric != Metric::SignificanceAdjusted {
                return Err(EngineError::InvalidQuery(String::from(
                    "alpha requires the significance_adjusted metric",
                )));
            }
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(EngineError::InvalidQuery(String::from("alpha must be in (0, 1)")));
            }
        }
        Ok(())
    }
}

/// A ranked guidepost request for one descriptor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GuidepostQuery {
    pub descriptor: DescriptorKind,
    pub k: usize,
    #[serde(default)]
    pub settings: QuerySettings,
}

impl GuidepostQuery {
    pub const DEFAULT_K: usize = 10;

    pub fn new(descriptor: DescriptorKind) -> Self {
        Self { descriptor, k: Self::DEFAULT_K, settings: QuerySettings::default() }
    }

    pub fn k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn mode(mut self, mode: Mode) -> Self {
        self.settings.mode = mode;
        self
    }

    pub fn order(mut self, order: Order) -> Self {
        self.settings.order = Some(order);
        self
    }

    pub fn filter(mut self, min: Option<f64>, max: Option<f64>) -> Self {
        self.settings.min = min;
        self.settings.max = max;
        self
    }

    pub fn significance(mut self, alpha: Option<f64>) -> Self {
        self.settings.metric = Metric::SignificanceAdjusted;
        self.settings.alpha = alpha;
        self
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        if self.k == 0 {
            return Err(EngineError::InvalidQuery(String::from("k must be at least 1")));
        }
        self.settings.validate(self.descriptor)
    }
}

/// Sorted attribute indices of an instance: one column, or a pair `i < j`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Tuple(Vec<usize>);

impl Tuple {
    pub fn unary(i: usize) -> Self {
        Tuple(alloc::vec![i])
    }

    pub fn pair(i: usize, j: usize) -> Self {
        assert_ne!(i, j, "a pair needs two distinct columns");
        Tuple(alloc::vec![i.min(j), i.max(j)])
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, column: usize) -> bool {
        self.0.contains(&column)
    }

    /// The member other than `column`, for a pair containing it.
    pub fn partner(&self, column: usize) -> Option<usize> {
        match self.0.as_slice() {
            [a, b] if *a == column => Some(*b),
            [a, b] if *b == column => Some(*a),
            _ => None,
        }
    }
}
