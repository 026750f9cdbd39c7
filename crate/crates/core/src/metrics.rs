//! Design metrics, normalization and the weighted-sum objective.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute tolerance on the weights summing to one.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("{name} must be strictly positive and finite, got {value}")]
    NonPositiveMetric { name: &'static str, value: f64 },
    #[error("weight {name} = {value} is outside [0, 1]")]
    WeightOutOfRange { name: &'static str, value: f64 },
    #[error("weights sum to {sum}, expected 1")]
    WeightsDoNotSumToOne { sum: f64 },
}

fn positive(name: &'static str, value: f64) -> Result<f64, MetricsError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(MetricsError::NonPositiveMetric { name, value })
    }
}

/// Raw evaluator output: total power in watts, execution time in milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawMetrics {
    pub power_watts: f64,
    pub exec_time_ms: f64,
}

impl RawMetrics {
    pub fn new(power_watts: f64, exec_time_ms: f64) -> Result<Self, MetricsError> {
        Ok(RawMetrics {
            power_watts: positive("power_watts", power_watts)?,
            exec_time_ms: positive("exec_time_ms", exec_time_ms)?,
        })
    }
}

/// Per-benchmark maxima observed during the one-shot phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormConstants {
    pub max_power: f64,
    pub max_time: f64,
}

impl NormConstants {
    pub fn new(max_power: f64, max_time: f64) -> Result<Self, MetricsError> {
        Ok(NormConstants {
            max_power: positive("max_power", max_power)?,
            max_time: positive("max_time", max_time)?,
        })
    }

    /// Component-wise maxima of a non-empty set of measurements.
    pub fn from_maxima<'a>(raws: impl IntoIterator<Item = &'a RawMetrics>) -> Option<Self> {
        raws.into_iter().fold(None, |acc, r| {
            Some(match acc {
                None => NormConstants {
                    max_power: r.power_watts,
                    max_time: r.exec_time_ms,
                },
                Some(n) => NormConstants {
                    max_power: n.max_power.max(r.power_watts),
                    max_time: n.max_time.max(r.exec_time_ms),
                },
            })
        })
    }

    pub fn scaled(&self, factor: f64) -> Self {
        NormConstants {
            max_power: self.max_power * factor,
            max_time: self.max_time * factor,
        }
    }
}

/// Dimensionless metrics. Values above 1.0 are legal for configurations
/// evaluated after the maxima were frozen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizedMetrics {
    pub v_power: f64,
    pub v_time: f64,
}

pub fn normalize(raw: &RawMetrics, norms: &NormConstants) -> Result<NormalizedMetrics, MetricsError> {
    positive("max_power", norms.max_power)?;
    positive("max_time", norms.max_time)?;
    Ok(NormalizedMetrics {
        v_power: positive("power_watts", raw.power_watts)? / norms.max_power,
        v_time: positive("exec_time_ms", raw.exec_time_ms)? / norms.max_time,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WeightsRepr", into = "WeightsRepr")]
pub struct Weights {
    w_power: f64,
    w_time: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightsRepr {
    power: f64,
    time: f64,
}

impl TryFrom<WeightsRepr> for Weights {
    type Error = MetricsError;

    fn try_from(r: WeightsRepr) -> Result<Self, Self::Error> {
        Weights::new(r.power, r.time)
    }
}

impl From<Weights> for WeightsRepr {
    fn from(w: Weights) -> Self {
        WeightsRepr {
            power: w.w_power,
            time: w.w_time,
        }
    }
}

impl Weights {
    /// Validates a weight pair: each in `[0, 1]`, summing to one.
    pub fn new(w_power: f64, w_time: f64) -> Result<Self, MetricsError> {
        for (name, value) in [("power", w_power), ("time", w_time)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(MetricsError::WeightOutOfRange { name, value });
            }
        }
        let sum = w_power + w_time;
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(MetricsError::WeightsDoNotSumToOne { sum });
        }
        Ok(Weights { w_power, w_time })
    }

    /// Power-dominated preset (0.9, 0.1).
    pub fn low_power() -> Self {
        Weights {
            w_power: 0.9,
            w_time: 0.1,
        }
    }

    /// Performance-dominated preset (0.1, 0.9).
    pub fn high_performance() -> Self {
        Weights {
            w_power: 0.1,
            w_time: 0.9,
        }
    }

    pub fn power(&self) -> f64 {
        self.w_power
    }

    pub fn time(&self) -> f64 {
        self.w_time
    }
}

/// Scalar objective; lower is better.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectiveValue(f64);

impl ObjectiveValue {
    pub const INFINITY: ObjectiveValue = ObjectiveValue(f64::INFINITY);

    pub fn value(&self) -> f64 {
        self.0
    }
}

impl PartialEq for ObjectiveValue {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for ObjectiveValue {}

impl PartialOrd for ObjectiveValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ObjectiveValue {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl fmt::Display for ObjectiveValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.6}", self.0)
    }
}

pub fn objective(v: &NormalizedMetrics, w: &Weights) -> ObjectiveValue {
    ObjectiveValue(w.w_power * v.v_power + w.w_time * v.v_time)
}

/// Normalizes and scores in one step.
pub fn score(raw: &RawMetrics, norms: &NormConstants, w: &Weights) -> Result<ObjectiveValue, MetricsError> {
    Ok(objective(&normalize(raw, norms)?, w))
}
