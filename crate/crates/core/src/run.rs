//! Drives a validated [`RunConfig`] through the search and/or the oracle and
//! assembles the artifacts.

use std::collections::HashSet;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::analysis::{compare, full_exhaustive, pareto_front, plot_rows, tangency_check, OracleResult, RunSummary};
use crate::config::{EvaluatorSpec, RunConfig};
use crate::cost_model::{CostModelError, CostModelEvaluator};
use crate::evaluator::{BenchmarkId, CachedEvaluator, Evaluator};
use crate::explorer::{explore, phase1_one_shot, BenchmarkOutcome, PhaseTag, PhaseTrace};
use crate::external::ExternalEvaluator;
use crate::metrics::{normalize, score, NormConstants, RawMetrics};
use crate::report::{
    analysis_error_kind, error_kind, render_summary, round_metric, round_objective, rounded_comparison,
    rounded_norms, write_log_csv, write_plot_csv, BenchmarkReport, BenchmarkResult, ErrorEntry,
    ExplorationReport, LogRow, OracleEntry, PartitionEntry, PhaseCountEntry, RunMode, SignificanceEntry,
    TOOL_VERSION,
};
use crate::space::Configuration;

pub const REPORT_FILE: &str = "report.json";
pub const LOG_FILE: &str = "evaluations.csv";
pub const SUMMARY_FILE: &str = "summary.txt";

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub seed: u64,
    pub jobs: usize,
    pub oracle: bool,
    pub timestamp: String,
}

pub type PlotRows = Vec<(f64, f64, bool, bool)>;

/// Everything a run produces, ready to be written out.
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub report: ExplorationReport,
    pub log: Vec<LogRow>,
    /// Pareto plot data per benchmark, present when the oracle ran.
    pub plots: Vec<(String, PlotRows)>,
}

impl Artifacts {
    pub fn failed(&self) -> bool {
        self.report.benchmarks.iter().any(|b| b.error.is_some())
    }

    pub fn plot_file_name(benchmark: &str) -> String {
        format!("pareto_{benchmark}.csv")
    }

    /// Writes the report, log, summary and plot files into `dir`.
    pub fn write(&self, dir: &Path, config: &RunConfig) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(REPORT_FILE), self.report.to_json())?;
        fs::write(dir.join(SUMMARY_FILE), render_summary(&self.report))?;
        let mut log = BufWriter::new(fs::File::create(dir.join(LOG_FILE))?);
        write_log_csv(&config.design_space, &self.log, &mut log).map_err(io::Error::other)?;
        log.flush()?;
        for (bench, rows) in &self.plots {
            let mut f = BufWriter::new(fs::File::create(dir.join(Self::plot_file_name(bench)))?);
            write_plot_csv(rows, &mut f).map_err(io::Error::other)?;
            f.flush()?;
        }
        Ok(())
    }
}

/// Instantiates the configured evaluator. Cost-model workloads not pinned
/// in the document are drawn from `seed`.
pub fn build_evaluator(config: &RunConfig, seed: u64) -> Result<Box<dyn Evaluator>, CostModelError> {
    match &config.evaluator {
        EvaluatorSpec::CostModel(spec) => {
            let mut eval = CostModelEvaluator::seeded(spec.power.params(), seed, &config.benchmarks)?;
            for (bench, profile) in &spec.workloads {
                eval = eval.with_workload(bench, profile.clone())?;
            }
            Ok(Box::new(eval))
        }
        EvaluatorSpec::External(spec) => Ok(Box::new(ExternalEvaluator::new(spec.clone()))),
    }
}

fn empty_report(config: &RunConfig, opts: &RunOptions, mode: RunMode) -> ExplorationReport {
    ExplorationReport {
        tool_version: TOOL_VERSION.to_string(),
        mode,
        config_hash: config.hash(),
        seed: opts.seed,
        timestamp: opts.timestamp.clone(),
        weights: config.weights,
        threshold: config.threshold.get(),
        cardinality: config.design_space.cardinality(),
        parameters: config.design_space.names().map(String::from).collect(),
        benchmarks: Vec::new(),
    }
}

fn failure(bench: &BenchmarkId, kind: &str, message: String) -> BenchmarkReport {
    BenchmarkReport {
        benchmark: bench.name.clone(),
        category: bench.category,
        result: None,
        error: Some(ErrorEntry {
            kind: kind.to_string(),
            message,
        }),
    }
}

fn log_row(
    config: &RunConfig,
    bench: &str,
    phase: PhaseTag,
    conf: &Configuration,
    raw: RawMetrics,
    norms: &NormConstants,
    cache_hit: bool,
) -> Option<LogRow> {
    let normalized = normalize(&raw, norms).ok()?;
    Some(LogRow {
        benchmark: bench.to_string(),
        phase,
        config: conf.clone(),
        raw,
        normalized,
        objective: score(&raw, norms, &config.weights).ok()?,
        cache_hit,
    })
}

fn trace_rows(config: &RunConfig, trace: &PhaseTrace, norms: &NormConstants) -> Vec<LogRow> {
    trace
        .records
        .iter()
        .filter_map(|r| log_row(config, &r.benchmark, r.phase, &r.config, r.raw, norms, r.cache_hit))
        .collect()
}

struct OracleAnalysis {
    entry: OracleEntry,
    plot: PlotRows,
}

fn analyse_oracle(
    config: &RunConfig,
    oracle: &OracleResult,
    norms: &NormConstants,
    solution: &Configuration,
) -> Result<OracleAnalysis, crate::analysis::AnalysisError> {
    let front = pareto_front(&oracle.records)?;
    let tangency = tangency_check(&oracle.records, &front, &config.weights, norms, &oracle.raw)?;
    let plot = plot_rows(&oracle.records, &front, norms, solution)?;
    Ok(OracleAnalysis {
        entry: OracleEntry {
            config: oracle.config.clone(),
            power_watts: round_metric(oracle.raw.power_watts),
            exec_time_ms: round_metric(oracle.raw.exec_time_ms),
            objective: round_objective(oracle.objective.value()),
            evaluations: oracle.evaluations(),
            optimum_on_front: front.contains(&oracle.raw),
            tangent: tangency.tangent,
        },
        plot,
    })
}

fn method_result(outcome: &BenchmarkOutcome) -> BenchmarkResult {
    BenchmarkResult {
        config: outcome.config.clone(),
        power_watts: round_metric(outcome.raw.power_watts),
        exec_time_ms: round_metric(outcome.raw.exec_time_ms),
        objective: round_objective(outcome.objective.value()),
        norms: rounded_norms(&outcome.norms),
        unique_evaluations: outcome.counter.unique_configs,
        total_requests: outcome.counter.total_calls,
        explored_fraction: round_objective(outcome.explored_fraction),
        phases: outcome
            .phase_counts
            .iter()
            .map(|(phase, c)| PhaseCountEntry {
                phase: *phase,
                requested: c.requested,
                unique: c.unique,
            })
            .collect(),
        significance: Some(
            outcome
                .significance
                .entries
                .iter()
                .map(|(p, d)| SignificanceEntry {
                    parameter: p.clone(),
                    value: round_objective(*d),
                })
                .collect(),
        ),
        partition: Some(PartitionEntry {
            exhaustive: outcome.partition.exhaustive.clone(),
            greedy: outcome.partition.greedy.clone(),
            frozen: outcome.partition.frozen.clone(),
        }),
        oracle: None,
        comparison: None,
    }
}

/// Runs the four-phase search for every benchmark, optionally followed by
/// the full-exhaustive oracle and the comparison.
pub fn run_explore(config: &RunConfig, opts: &RunOptions) -> Result<Artifacts, CostModelError> {
    let evaluator = build_evaluator(config, opts.seed)?;
    let cache = CachedEvaluator::new(evaluator);
    let space = &config.design_space;
    let outcomes = explore(
        space,
        &cache,
        &config.benchmarks,
        &config.weights,
        config.threshold,
        opts.jobs,
    );

    let mut report = empty_report(config, opts, RunMode::Explore);
    let mut log = Vec::new();
    let mut plots = Vec::new();
    for (bench, outcome) in config.benchmarks.iter().zip(outcomes) {
        let outcome = match outcome {
            Ok(o) => o,
            Err(e) => {
                report.benchmarks.push(failure(bench, error_kind(&e), e.to_string()));
                continue;
            }
        };
        log.extend(trace_rows(config, &outcome.trace, &outcome.norms));
        let mut result = method_result(&outcome);
        let mut error = None;
        if opts.oracle {
            let oracle = full_exhaustive(
                space,
                &cache,
                bench,
                &config.weights,
                &outcome.norms,
                config.oracle_budget as u128,
                opts.jobs,
            )
            .and_then(|o| {
                let analysis = analyse_oracle(config, &o, &outcome.norms, &outcome.config)?;
                let method = RunSummary {
                    benchmark: bench.name.clone(),
                    cardinality: outcome.cardinality,
                    weights: config.weights,
                    norms: outcome.norms,
                    config: outcome.config.clone(),
                    raw: outcome.raw,
                    objective: outcome.objective.value(),
                    unique_evaluations: outcome.counter.unique_configs,
                };
                let reference = RunSummary {
                    config: o.config.clone(),
                    raw: o.raw,
                    objective: o.objective.value(),
                    unique_evaluations: o.evaluations(),
                    ..method.clone()
                };
                Ok((analysis, compare(&method, &reference)?))
            });
            match oracle {
                Ok((analysis, stats)) => {
                    result.oracle = Some(analysis.entry);
                    result.comparison = Some(rounded_comparison(&stats));
                    plots.push((bench.name.clone(), analysis.plot));
                }
                Err(e) => {
                    error = Some(ErrorEntry {
                        kind: analysis_error_kind(&e).to_string(),
                        message: format!("oracle: {e}"),
                    });
                }
            }
        }
        report.benchmarks.push(BenchmarkReport {
            benchmark: bench.name.clone(),
            category: bench.category,
            result: Some(result),
            error,
        });
    }
    Ok(Artifacts { report, log, plots })
}

/// Full-exhaustive search for every benchmark. Normalization constants come
/// from the same one-shot probes the search uses, so reports of both modes
/// are comparable.
pub fn run_oracle(config: &RunConfig, opts: &RunOptions) -> Result<Artifacts, CostModelError> {
    let evaluator = build_evaluator(config, opts.seed)?;
    let cache = CachedEvaluator::new(evaluator);
    let space = &config.design_space;
    let mut report = empty_report(config, opts, RunMode::Oracle);
    let mut log = Vec::new();
    let mut plots = Vec::new();

    for bench in &config.benchmarks {
        let mut trace = PhaseTrace::default();
        let one_shot = match phase1_one_shot(space, &cache, bench, &config.weights, &mut trace) {
            Ok(o) => o,
            Err(e) => {
                report.benchmarks.push(failure(bench, error_kind(&e), e.to_string()));
                continue;
            }
        };
        let norms = one_shot.norms;
        let oracle = full_exhaustive(
            space,
            &cache,
            bench,
            &config.weights,
            &norms,
            config.oracle_budget as u128,
            opts.jobs,
        )
        .and_then(|o| {
            let analysis = analyse_oracle(config, &o, &norms, &o.config)?;
            Ok((o, analysis))
        });
        let (oracle, analysis) = match oracle {
            Ok(x) => x,
            Err(e) => {
                report
                    .benchmarks
                    .push(failure(bench, analysis_error_kind(&e), e.to_string()));
                continue;
            }
        };

        log.extend(trace_rows(config, &trace, &norms));
        let probed: HashSet<&Configuration> = trace.records.iter().map(|r| &r.config).collect();
        log.extend(oracle.records.iter().filter_map(|r| {
            log_row(
                config,
                &bench.name,
                PhaseTag::Oracle,
                &r.config,
                r.raw,
                &norms,
                probed.contains(&r.config),
            )
        }));

        let counter = cache.counter(&bench.name);
        let cardinality = space.cardinality();
        report.benchmarks.push(BenchmarkReport {
            benchmark: bench.name.clone(),
            category: bench.category,
            result: Some(BenchmarkResult {
                config: oracle.config.clone(),
                power_watts: round_metric(oracle.raw.power_watts),
                exec_time_ms: round_metric(oracle.raw.exec_time_ms),
                objective: round_objective(oracle.objective.value()),
                norms: rounded_norms(&norms),
                unique_evaluations: counter.unique_configs,
                total_requests: counter.total_calls,
                explored_fraction: round_objective(counter.unique_configs as f64 / cardinality as f64),
                phases: vec![
                    PhaseCountEntry {
                        phase: PhaseTag::Phase1,
                        requested: trace.requests(PhaseTag::Phase1) as u64,
                        unique: trace.misses(PhaseTag::Phase1) as u64,
                    },
                    PhaseCountEntry {
                        phase: PhaseTag::Oracle,
                        requested: oracle.evaluations(),
                        unique: oracle.evaluations() - probed.len() as u64,
                    },
                ],
                significance: None,
                partition: None,
                oracle: Some(analysis.entry),
                comparison: None,
            }),
            error: None,
        });
        plots.push((bench.name.clone(), analysis.plot));
    }
    Ok(Artifacts { report, log, plots })
}
