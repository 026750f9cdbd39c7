//! Ground truth for the search: full exhaustive evaluation, Pareto fronts,
//! tangency of the objective line, and methodology-vs-oracle statistics.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evaluator::{BenchmarkId, EvaluationError, Evaluator};
use crate::metrics::{normalize, score, MetricsError, NormConstants, ObjectiveValue, RawMetrics, Weights};
use crate::space::{Configuration, DesignSpace};

/// Default ceiling on the number of configurations a full search may visit.
pub const DEFAULT_ORACLE_BUDGET: u128 = 1_000_000;

/// Slack allowed when checking that no front point lies below the
/// objective line through the solution.
pub const TANGENCY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("design space has {cardinality} configurations, above the budget of {budget}")]
    BudgetExceeded { cardinality: u128, budget: u128 },
    #[error(transparent)]
    Evaluation(#[from] EvaluationError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("no points to analyse")]
    EmptyInput,
    #[error("solution metrics do not appear in the record set")]
    SolutionNotInRecords,
    #[error("runs are not comparable: {0}")]
    MismatchedRun(String),
}

/// A configuration with its measured metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluated {
    pub config: Configuration,
    pub raw: RawMetrics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub config: Configuration,
    pub raw: RawMetrics,
    pub objective: ObjectiveValue,
    /// Every configuration in enumeration order.
    pub records: Vec<Evaluated>,
}

impl OracleResult {
    pub fn evaluations(&self) -> u64 {
        self.records.len() as u64
    }
}

/// Evaluates every configuration of the space and returns the one with the
/// smallest objective, first in enumeration order on ties.
///
/// Evaluations fan out over `jobs` threads; results are assembled in
/// enumeration order so the outcome does not depend on scheduling.
pub fn full_exhaustive<E: Evaluator>(
    space: &DesignSpace,
    evaluator: &E,
    benchmark: &BenchmarkId,
    weights: &Weights,
    norms: &NormConstants,
    budget: u128,
    jobs: usize,
) -> Result<OracleResult, AnalysisError> {
    let cardinality = space.cardinality();
    if cardinality > budget {
        return Err(AnalysisError::BudgetExceeded { cardinality, budget });
    }
    let configs: Vec<Configuration> = space.enumerate().collect();
    let raws = evaluate_all(evaluator, &configs, benchmark, jobs)?;

    let mut best: Option<(usize, ObjectiveValue)> = None;
    for (i, raw) in raws.iter().enumerate() {
        let objective = score(raw, norms, weights)?;
        if best.is_none_or(|(_, b)| objective < b) {
            best = Some((i, objective));
        }
    }
    let (idx, objective) = best.expect("a valid space has at least one configuration");
    let records: Vec<Evaluated> = configs
        .into_iter()
        .zip(raws)
        .map(|(config, raw)| Evaluated { config, raw })
        .collect();
    Ok(OracleResult {
        config: records[idx].config.clone(),
        raw: records[idx].raw,
        objective,
        records,
    })
}

fn evaluate_all<E: Evaluator>(
    evaluator: &E,
    configs: &[Configuration],
    benchmark: &BenchmarkId,
    jobs: usize,
) -> Result<Vec<RawMetrics>, EvaluationError> {
    let jobs = jobs.clamp(1, configs.len().max(1));
    if jobs == 1 {
        return configs.iter().map(|c| evaluator.evaluate(c, benchmark)).collect();
    }
    let next = AtomicUsize::new(0);
    let results: Vec<Mutex<Option<Result<RawMetrics, EvaluationError>>>> =
        configs.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(c) = configs.get(i) else { break };
                let r = evaluator.evaluate(c, benchmark);
                let failed = r.is_err();
                *results[i].lock().expect("result slot poisoned") = Some(r);
                if failed {
                    // stop handing out work; earlier failures win below
                    next.store(configs.len(), Ordering::SeqCst);
                }
            });
        }
    });
    let mut out = Vec::with_capacity(configs.len());
    for slot in results {
        match slot.into_inner().expect("result slot poisoned") {
            Some(r) => out.push(r?),
            None => unreachable!("work stops only after a recorded failure"),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontPoint {
    pub power: f64,
    pub time: f64,
    pub config: Configuration,
}

/// Non-dominated points under (minimize power, minimize time), sorted by
/// ascending power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoFront {
    pub points: Vec<FrontPoint>,
}

impl ParetoFront {
    pub fn contains(&self, raw: &RawMetrics) -> bool {
        self.points
            .iter()
            .any(|p| p.power == raw.power_watts && p.time == raw.exec_time_ms)
    }
}

/// `a` dominates `b` when it is no worse in both metrics and strictly better
/// in at least one.
pub fn dominates(a: (f64, f64), b: (f64, f64)) -> bool {
    a.0 <= b.0 && a.1 <= b.1 && (a.0 < b.0 || a.1 < b.1)
}

/// Extracts the Pareto front. Exact duplicates collapse to the first one
/// encountered.
pub fn pareto_front(records: &[Evaluated]) -> Result<ParetoFront, AnalysisError> {
    if records.is_empty() {
        return Err(AnalysisError::EmptyInput);
    }
    let mut order: Vec<usize> = (0..records.len()).collect();
    // stable: among equal points the first encountered stays first
    order.sort_by(|&a, &b| {
        let (ra, rb) = (&records[a].raw, &records[b].raw);
        ra.power_watts
            .total_cmp(&rb.power_watts)
            .then(ra.exec_time_ms.total_cmp(&rb.exec_time_ms))
    });
    let mut points = Vec::new();
    let mut best_time = f64::INFINITY;
    for i in order {
        let r = &records[i];
        if r.raw.exec_time_ms < best_time {
            best_time = r.raw.exec_time_ms;
            points.push(FrontPoint {
                power: r.raw.power_watts,
                time: r.raw.exec_time_ms,
                config: r.config.clone(),
            });
        }
    }
    Ok(ParetoFront { points })
}

/// Result of a tangency check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tangency {
    pub tangent: bool,
    pub solution_objective: f64,
    /// Index into the front of the point with the smallest objective.
    pub witness: usize,
    pub witness_objective: f64,
}

/// Checks whether the line of slope `-w_power / w_time` through the
/// solution's normalized point supports the front, i.e. no front point has
/// a smaller weighted objective (within [`TANGENCY_TOLERANCE`]).
pub fn tangency_check(
    records: &[Evaluated],
    front: &ParetoFront,
    weights: &Weights,
    norms: &NormConstants,
    solution: &RawMetrics,
) -> Result<Tangency, AnalysisError> {
    if front.points.is_empty() {
        return Err(AnalysisError::EmptyInput);
    }
    if !records.iter().any(|r| r.raw == *solution) {
        return Err(AnalysisError::SolutionNotInRecords);
    }
    let solution_objective = score(solution, norms, weights)?.value();
    let mut witness = 0;
    let mut witness_objective = f64::INFINITY;
    for (i, p) in front.points.iter().enumerate() {
        let raw = RawMetrics::new(p.power, p.time)?;
        let f = score(&raw, norms, weights)?.value();
        if f < witness_objective {
            witness = i;
            witness_objective = f;
        }
    }
    Ok(Tangency {
        tangent: solution_objective <= witness_objective + TANGENCY_TOLERANCE,
        solution_objective,
        witness,
        witness_objective,
    })
}

/// The fields of a finished run that a comparison needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub benchmark: String,
    pub cardinality: u128,
    pub weights: Weights,
    pub norms: NormConstants,
    pub config: Configuration,
    pub raw: RawMetrics,
    pub objective: f64,
    pub unique_evaluations: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonStats {
    /// Signed percentages, `(method - oracle) / oracle * 100`.
    pub quality_gap_power: f64,
    pub quality_gap_time: f64,
    pub objective_gap: f64,
    pub explored_fraction: f64,
    /// Oracle evaluations per methodology evaluation.
    pub speedup: f64,
}

fn percent_gap(method: f64, oracle: f64) -> f64 {
    (method - oracle) / oracle * 100.0
}

pub fn compare(method: &RunSummary, oracle: &RunSummary) -> Result<ComparisonStats, AnalysisError> {
    let mismatch = |what: &str| Err(AnalysisError::MismatchedRun(what.to_string()));
    if method.benchmark != oracle.benchmark {
        return mismatch("benchmark names differ");
    }
    if method.cardinality != oracle.cardinality {
        return mismatch("design space cardinalities differ");
    }
    if method.weights != oracle.weights {
        return mismatch("weights differ");
    }
    if method.norms != oracle.norms {
        return mismatch("normalization constants differ");
    }
    if method.unique_evaluations == 0 {
        return mismatch("methodology run records no evaluations");
    }
    Ok(ComparisonStats {
        quality_gap_power: percent_gap(method.raw.power_watts, oracle.raw.power_watts),
        quality_gap_time: percent_gap(method.raw.exec_time_ms, oracle.raw.exec_time_ms),
        objective_gap: percent_gap(method.objective, oracle.objective),
        explored_fraction: method.unique_evaluations as f64 / method.cardinality as f64,
        speedup: oracle.unique_evaluations as f64 / method.unique_evaluations as f64,
    })
}

/// Rows of the Pareto plot-data file: `(v_power, v_time, on_front, is_solution)`.
pub fn plot_rows(
    records: &[Evaluated],
    front: &ParetoFront,
    norms: &NormConstants,
    solution: &Configuration,
) -> Result<Vec<(f64, f64, bool, bool)>, AnalysisError> {
    records
        .iter()
        .map(|r| {
            let v = normalize(&r.raw, norms)?;
            let on_front = front.points.iter().any(|p| p.config == r.config);
            Ok((v.v_power, v.v_time, on_front, r.config == *solution))
        })
        .collect()
}
