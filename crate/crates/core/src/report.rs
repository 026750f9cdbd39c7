//! Run artifacts: the JSON report, the evaluation log and Pareto plot CSVs,
//! and the plain-text summary table.
//!
//! Watts and milliseconds are written with 3 decimals, objectives and
//! normalized values with 6.

use std::fmt::Write as _;
use std::io;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{AnalysisError, ComparisonStats, RunSummary};
use crate::evaluator::{Category, EvaluationError};
use crate::explorer::{ExploreError, PhaseTag};
use crate::external::ExternalError;
use crate::metrics::{MetricsError, NormConstants, NormalizedMetrics, ObjectiveValue, RawMetrics, Weights};
use crate::space::{Configuration, DesignSpace};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn round_to(x: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    let r = (x * scale).round() / scale;
    // avoid "-0.0" in output
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

pub fn round_metric(x: f64) -> f64 {
    round_to(x, 3)
}

pub fn round_objective(x: f64) -> f64 {
    round_to(x, 6)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunMode {
    Explore,
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplorationReport {
    pub tool_version: String,
    pub mode: RunMode,
    pub config_hash: String,
    pub seed: u64,
    pub timestamp: String,
    pub weights: Weights,
    pub threshold: u64,
    pub cardinality: u128,
    pub parameters: Vec<String>,
    pub benchmarks: Vec<BenchmarkReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkReport {
    pub benchmark: String,
    pub category: Category,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<BenchmarkResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorEntry {
    pub kind: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseCountEntry {
    pub phase: PhaseTag,
    pub requested: u64,
    pub unique: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignificanceEntry {
    pub parameter: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionEntry {
    pub exhaustive: Vec<String>,
    pub greedy: Vec<String>,
    pub frozen: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleEntry {
    pub config: Configuration,
    pub power_watts: f64,
    pub exec_time_ms: f64,
    pub objective: f64,
    pub evaluations: u64,
    pub optimum_on_front: bool,
    pub tangent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkResult {
    pub config: Configuration,
    pub power_watts: f64,
    pub exec_time_ms: f64,
    pub objective: f64,
    pub norms: NormConstants,
    pub unique_evaluations: u64,
    pub total_requests: u64,
    pub explored_fraction: f64,
    pub phases: Vec<PhaseCountEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub significance: Option<Vec<SignificanceEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<PartitionEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comparison: Option<ComparisonStats>,
}

pub fn rounded_norms(n: &NormConstants) -> NormConstants {
    NormConstants {
        max_power: round_metric(n.max_power),
        max_time: round_metric(n.max_time),
    }
}

pub fn rounded_comparison(c: &ComparisonStats) -> ComparisonStats {
    ComparisonStats {
        quality_gap_power: round_objective(c.quality_gap_power),
        quality_gap_time: round_objective(c.quality_gap_time),
        objective_gap: round_objective(c.objective_gap),
        explored_fraction: round_objective(c.explored_fraction),
        speedup: round_objective(c.speedup),
    }
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("cannot read report: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("benchmark `{0}` is missing from the oracle report")]
    MissingBenchmark(String),
    #[error("benchmark `{0}` has no result in one of the reports")]
    NoResult(String),
    #[error("report metrics are invalid: {0}")]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

impl ExplorationReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report is always serializable");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, ReportError> {
        Ok(serde_json::from_str(text)?)
    }

    /// The comparison inputs for one benchmark, as recorded in this report.
    pub fn summary(&self, benchmark: &str) -> Result<RunSummary, ReportError> {
        let entry = self
            .benchmarks
            .iter()
            .find(|b| b.benchmark == benchmark)
            .ok_or_else(|| ReportError::MissingBenchmark(benchmark.to_string()))?;
        let r = entry
            .result
            .as_ref()
            .ok_or_else(|| ReportError::NoResult(benchmark.to_string()))?;
        Ok(RunSummary {
            benchmark: benchmark.to_string(),
            cardinality: self.cardinality,
            weights: self.weights,
            norms: r.norms,
            config: r.config.clone(),
            raw: RawMetrics::new(r.power_watts, r.exec_time_ms)?,
            objective: r.objective,
            unique_evaluations: r.unique_evaluations,
        })
    }
}

/// Comparison of every benchmark of `method` against the same benchmark in
/// `oracle`, in `method` order. Benchmarks that failed in either run are
/// reported as errors.
pub fn compare_reports(
    method: &ExplorationReport,
    oracle: &ExplorationReport,
) -> Vec<(String, Result<ComparisonStats, ReportError>)> {
    method
        .benchmarks
        .iter()
        .map(|b| {
            let stats = method.summary(&b.benchmark).and_then(|m| {
                let o = oracle.summary(&b.benchmark)?;
                Ok(crate::analysis::compare(&m, &o)?)
            });
            (b.benchmark.clone(), stats)
        })
        .collect()
}

/// Stable machine-readable name for a failure.
pub fn error_kind(e: &ExploreError) -> &'static str {
    match e {
        ExploreError::Evaluation { source, .. } => evaluation_error_kind(source),
        ExploreError::Metrics { .. } => "InvalidMetrics",
    }
}

pub fn evaluation_error_kind(e: &EvaluationError) -> &'static str {
    match e {
        EvaluationError::External(x) => match x {
            ExternalError::Template(_) => "Template",
            ExternalError::SpawnFailed { .. } => "SpawnFailed",
            ExternalError::NonZeroExit { .. } => "NonZeroExit",
            ExternalError::Timeout { .. } => "Timeout",
            ExternalError::ResultFileMissing { .. } => "ResultFileMissing",
            ExternalError::ResultParseError { .. } => "ResultParseError",
        },
        EvaluationError::CostModel(_) => "CostModel",
        EvaluationError::InvalidMetrics(_) => "InvalidMetrics",
        EvaluationError::UnknownBenchmark(_) => "UnknownBenchmark",
        EvaluationError::Failed(_) => "EvaluationFailed",
    }
}

pub fn analysis_error_kind(e: &AnalysisError) -> &'static str {
    match e {
        AnalysisError::BudgetExceeded { .. } => "BudgetExceeded",
        AnalysisError::Evaluation(inner) => evaluation_error_kind(inner),
        AnalysisError::Metrics(_) => "InvalidMetrics",
        AnalysisError::EmptyInput => "EmptyInput",
        AnalysisError::SolutionNotInRecords => "SolutionNotInRecords",
        AnalysisError::MismatchedRun(_) => "MismatchedRun",
    }
}

/// One line of the evaluation log.
#[derive(Debug, Clone, PartialEq)]
pub struct LogRow {
    pub benchmark: String,
    pub phase: PhaseTag,
    pub config: Configuration,
    pub raw: RawMetrics,
    pub normalized: NormalizedMetrics,
    pub objective: ObjectiveValue,
    pub cache_hit: bool,
}

fn csv_writer<W: io::Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

/// Writes the evaluation log: `benchmark, phase, <one column per parameter>,
/// power_watts, exec_time_ms, v_power, v_time, objective, cache_hit`.
pub fn write_log_csv<W: io::Write>(space: &DesignSpace, rows: &[LogRow], out: W) -> csv::Result<()> {
    let mut w = csv_writer(out);
    let mut header = vec!["benchmark".to_string(), "phase".to_string()];
    header.extend(space.names().map(String::from));
    header.extend(
        ["power_watts", "exec_time_ms", "v_power", "v_time", "objective", "cache_hit"].map(String::from),
    );
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![r.benchmark.clone(), r.phase.to_string()];
        rec.extend(
            space
                .names()
                .map(|n| r.config.get(n).map(|s| s.to_string()).unwrap_or_default()),
        );
        rec.push(format!("{:.3}", r.raw.power_watts));
        rec.push(format!("{:.3}", r.raw.exec_time_ms));
        rec.push(format!("{:.6}", r.normalized.v_power));
        rec.push(format!("{:.6}", r.normalized.v_time));
        rec.push(format!("{:.6}", r.objective.value()));
        rec.push(r.cache_hit.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes Pareto plot data: `v_power, v_time, on_front, is_solution`.
pub fn write_plot_csv<W: io::Write>(rows: &[(f64, f64, bool, bool)], out: W) -> csv::Result<()> {
    let mut w = csv_writer(out);
    w.write_record(["v_power", "v_time", "on_front", "is_solution"])?;
    for (vp, vt, front, solution) in rows {
        w.write_record([
            format!("{vp:.6}"),
            format!("{vt:.6}"),
            front.to_string(),
            solution.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn fmt_opt(v: Option<f64>, decimals: usize) -> String {
    v.map(|x| format!("{x:.decimals$}")).unwrap_or_else(|| "-".into())
}

/// Human-readable table, one row per benchmark.
pub fn render_summary(report: &ExplorationReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{} run, {} configurations, weights power={} time={}, threshold {}, seed {}",
        match report.mode {
            RunMode::Explore => "exploration",
            RunMode::Oracle => "oracle",
        },
        report.cardinality,
        report.weights.power(),
        report.weights.time(),
        report.threshold,
        report.seed,
    );
    let _ = writeln!(
        s,
        "{:<16} {:>10} {:>12} {:>10} {:>7} {:>9} {:>10} {:>10} {:>10} {:>8}",
        "benchmark", "power_W", "time_ms", "objective", "unique", "explored", "gap_pow%", "gap_time%", "gap_obj%", "speedup"
    );
    for b in &report.benchmarks {
        match (&b.result, &b.error) {
            (Some(r), _) => {
                let c = r.comparison.as_ref();
                let _ = writeln!(
                    s,
                    "{:<16} {:>10.3} {:>12.3} {:>10.6} {:>7} {:>8.2}% {:>10} {:>10} {:>10} {:>8}",
                    b.benchmark,
                    r.power_watts,
                    r.exec_time_ms,
                    r.objective,
                    r.unique_evaluations,
                    r.explored_fraction * 100.0,
                    fmt_opt(c.map(|c| c.quality_gap_power), 3),
                    fmt_opt(c.map(|c| c.quality_gap_time), 3),
                    fmt_opt(c.map(|c| c.objective_gap), 3),
                    fmt_opt(c.map(|c| c.speedup), 2),
                );
            }
            (None, Some(e)) => {
                let _ = writeln!(s, "{:<16} FAILED {}: {}", b.benchmark, e.kind, e.message);
            }
            (None, None) => {
                let _ = writeln!(s, "{:<16} (no result)", b.benchmark);
            }
        }
    }
    s
}

/// Table for the `compare` subcommand.
pub fn render_comparison(rows: &[(String, Result<ComparisonStats, ReportError>)]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<16} {:>10} {:>10} {:>10} {:>9} {:>8}",
        "benchmark", "gap_pow%", "gap_time%", "gap_obj%", "explored", "speedup"
    );
    for (name, r) in rows {
        match r {
            Ok(c) => {
                let _ = writeln!(
                    s,
                    "{:<16} {:>10.3} {:>10.3} {:>10.3} {:>8.2}% {:>8.2}",
                    name,
                    c.quality_gap_power,
                    c.quality_gap_time,
                    c.objective_gap,
                    c.explored_fraction * 100.0,
                    c.speedup
                );
            }
            Err(e) => {
                let _ = writeln!(s, "{name:<16} FAILED {e}");
            }
        }
    }
    s
}
