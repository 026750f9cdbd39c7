//! The evaluation boundary: anything that maps a configuration and a
//! benchmark to raw power/time metrics, plus a memoizing wrapper.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cost_model::CostModelError;
use crate::external::ExternalError;
use crate::metrics::{MetricsError, RawMetrics};
use crate::space::Configuration;

/// Workload category used to pick synthetic workload ranges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Category {
    DataSensingAggregation,
    DataAnalysisMining,
    Graphics,
    SignalProcessingCommunication,
    Uncategorized,
}

impl Category {
    pub const ALL: [Category; 5] = [
        Category::DataSensingAggregation,
        Category::DataAnalysisMining,
        Category::Graphics,
        Category::SignalProcessingCommunication,
        Category::Uncategorized,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Category::DataSensingAggregation => "data-sensing-aggregation",
            Category::DataAnalysisMining => "data-analysis-mining",
            Category::Graphics => "graphics",
            Category::SignalProcessingCommunication => "signal-processing-communication",
            Category::Uncategorized => "uncategorized",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown category `{0}`")]
pub struct UnknownCategory(pub String);

impl FromStr for Category {
    type Err = UnknownCategory;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Category::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| UnknownCategory(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BenchmarkId {
    pub name: String,
    pub category: Category,
}

impl BenchmarkId {
    pub fn new(name: impl Into<String>, category: Category) -> Self {
        BenchmarkId {
            name: name.into(),
            category,
        }
    }
}

impl fmt::Display for BenchmarkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

#[derive(Debug, Error)]
pub enum EvaluationError {
    #[error(transparent)]
    External(#[from] ExternalError),
    #[error(transparent)]
    CostModel(#[from] CostModelError),
    #[error("evaluator returned invalid metrics: {0}")]
    InvalidMetrics(#[from] MetricsError),
    #[error("no workload registered for benchmark `{0}`")]
    UnknownBenchmark(String),
    #[error("{0}")]
    Failed(String),
}

/// Maps `(configuration, benchmark)` to raw metrics.
///
/// Implementations must be deterministic for a fixed input and must tolerate
/// concurrent calls for distinct keys.
pub trait Evaluator: Send + Sync {
    fn evaluate(&self, config: &Configuration, benchmark: &BenchmarkId) -> Result<RawMetrics, EvaluationError>;
}

impl<E: Evaluator + ?Sized> Evaluator for &E {
    fn evaluate(&self, config: &Configuration, benchmark: &BenchmarkId) -> Result<RawMetrics, EvaluationError> {
        (**self).evaluate(config, benchmark)
    }
}

impl<E: Evaluator + ?Sized> Evaluator for Arc<E> {
    fn evaluate(&self, config: &Configuration, benchmark: &BenchmarkId) -> Result<RawMetrics, EvaluationError> {
        (**self).evaluate(config, benchmark)
    }
}

impl<E: Evaluator + ?Sized> Evaluator for Box<E> {
    fn evaluate(&self, config: &Configuration, benchmark: &BenchmarkId) -> Result<RawMetrics, EvaluationError> {
        (**self).evaluate(config, benchmark)
    }
}

/// Request counts for one benchmark.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvaluationCounter {
    pub total_calls: u64,
    pub unique_configs: u64,
}

/// Outcome of a cached lookup.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lookup {
    pub raw: RawMetrics,
    pub cache_hit: bool,
}

type CacheKey = (Configuration, String);
type Slot = Arc<Mutex<Option<RawMetrics>>>;

/// Memoizing wrapper: at most one underlying evaluation per distinct
/// `(configuration, benchmark name)`, including under concurrent requests.
/// Failed evaluations are not cached.
pub struct CachedEvaluator<E> {
    inner: E,
    slots: Mutex<HashMap<CacheKey, Slot>>,
    counters: Mutex<HashMap<String, EvaluationCounter>>,
}

impl<E: Evaluator> CachedEvaluator<E> {
    pub fn new(inner: E) -> Self {
        CachedEvaluator {
            inner,
            slots: Mutex::new(HashMap::new()),
            counters: Mutex::new(HashMap::new()),
        }
    }

    pub fn inner(&self) -> &E {
        &self.inner
    }

    pub fn cached_evaluate(&self, config: &Configuration, benchmark: &BenchmarkId) -> Result<Lookup, EvaluationError> {
        self.bump(&benchmark.name, |c| c.total_calls += 1);

        let slot = {
            let mut slots = self.slots.lock().expect("cache lock poisoned");
            slots
                .entry((config.clone(), benchmark.name.clone()))
                .or_default()
                .clone()
        };

        // Holding the slot lock while evaluating makes concurrent requests
        // for the same key wait for the first result.
        let mut guard = slot.lock().expect("cache slot poisoned");
        if let Some(raw) = *guard {
            return Ok(Lookup { raw, cache_hit: true });
        }
        let raw = self.inner.evaluate(config, benchmark)?;
        *guard = Some(raw);
        drop(guard);
        self.bump(&benchmark.name, |c| c.unique_configs += 1);
        Ok(Lookup { raw, cache_hit: false })
    }

    pub fn counter(&self, benchmark: &str) -> EvaluationCounter {
        self.counters
            .lock()
            .expect("counter lock poisoned")
            .get(benchmark)
            .copied()
            .unwrap_or_default()
    }

    fn bump(&self, benchmark: &str, f: impl FnOnce(&mut EvaluationCounter)) {
        let mut counters = self.counters.lock().expect("counter lock poisoned");
        f(counters.entry(benchmark.to_string()).or_default());
    }
}

impl<E: Evaluator> Evaluator for CachedEvaluator<E> {
    fn evaluate(&self, config: &Configuration, benchmark: &BenchmarkId) -> Result<RawMetrics, EvaluationError> {
        self.cached_evaluate(config, benchmark).map(|l| l.raw)
    }
}
