//! The four-phase search: one-shot significance, set partitioning, bounded
//! exhaustive search and early-stopping greedy search.
//!
//! Every phase requests evaluations through a shared [`CachedEvaluator`], so
//! configurations revisited across phases cost nothing extra and the
//! per-benchmark unique-evaluation count is exact.

use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evaluator::{BenchmarkId, CachedEvaluator, EvaluationCounter, EvaluationError, Evaluator};
use crate::metrics::{normalize, score, MetricsError, NormConstants, NormalizedMetrics, ObjectiveValue, RawMetrics, Weights};
use crate::space::{Configuration, DesignSpace, Setting};

#[derive(Debug, Error)]
pub enum ExploreError {
    #[error("{phase}: {source}")]
    Evaluation {
        phase: PhaseTag,
        #[source]
        source: EvaluationError,
    },
    #[error("{phase}: {source}")]
    Metrics {
        phase: PhaseTag,
        #[source]
        source: MetricsError,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseTag {
    Phase1,
    Phase3,
    Phase4,
    Oracle,
}

impl PhaseTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            PhaseTag::Phase1 => "phase1",
            PhaseTag::Phase3 => "phase3",
            PhaseTag::Phase4 => "phase4",
            PhaseTag::Oracle => "oracle",
        }
    }
}

impl fmt::Display for PhaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Upper bound on the size of the exhaustive partial space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct ExplorationThreshold(u64);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("exploration threshold must be at least 1")]
pub struct ZeroThreshold;

impl ExplorationThreshold {
    pub fn new(t: u64) -> Result<Self, ZeroThreshold> {
        if t == 0 {
            Err(ZeroThreshold)
        } else {
            Ok(ExplorationThreshold(t))
        }
    }

    pub fn get(&self) -> u64 {
        self.0
    }
}

impl TryFrom<u64> for ExplorationThreshold {
    type Error = ZeroThreshold;

    fn try_from(t: u64) -> Result<Self, Self::Error> {
        ExplorationThreshold::new(t)
    }
}

impl From<ExplorationThreshold> for u64 {
    fn from(t: ExplorationThreshold) -> u64 {
        t.0
    }
}

/// Signed significance per parameter, in space order:
/// `objective(last setting) - objective(first setting)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceTable {
    pub entries: Vec<(String, f64)>,
}

impl SignificanceTable {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, d)| *d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    OneShot,
    Exhaustive,
    Greedy,
}

/// Chosen setting per parameter with the phase that chose it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestSettings {
    pub entries: Vec<(String, Setting, Provenance)>,
}

impl BestSettings {
    pub fn get(&self, name: &str) -> Option<Setting> {
        self.entries.iter().find(|(n, ..)| n == name).map(|(_, s, _)| *s)
    }

    pub fn provenance(&self, name: &str) -> Option<Provenance> {
        self.entries.iter().find(|(n, ..)| n == name).map(|(.., p)| *p)
    }

    fn set(&mut self, name: &str, value: Setting, provenance: Provenance) {
        if let Some(e) = self.entries.iter_mut().find(|(n, ..)| n == name) {
            e.1 = value;
            e.2 = provenance;
        }
    }

    pub fn to_configuration(&self, space: &DesignSpace) -> Configuration {
        Configuration::from_assignment(space, self.entries.iter().map(|(n, s, _)| (n.clone(), *s)))
            .expect("best settings cover the space")
    }
}

/// Parameters split into exhaustive, greedy and frozen groups.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub exhaustive: Vec<String>,
    pub greedy: Vec<String>,
    pub frozen: Vec<String>,
    /// Space indices sorted by descending significance magnitude.
    pub index_order: Vec<usize>,
}

impl Partition {
    /// Size of the exhaustive partial space.
    pub fn exhaustive_size(&self, space: &DesignSpace) -> u128 {
        self.exhaustive
            .iter()
            .map(|n| space.parameter(n).map_or(1, |p| p.len() as u128))
            .product()
    }

    /// Worst-case unique evaluations of a run with this partition.
    pub fn evaluation_ceiling(&self, space: &DesignSpace) -> u128 {
        let greedy: u128 = self
            .greedy
            .iter()
            .map(|n| space.parameter(n).map_or(0, |p| p.len() as u128))
            .sum();
        (space.len() as u128 + 1) + self.exhaustive_size(space) + greedy
    }
}

/// One requested evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRecord {
    pub config: Configuration,
    pub benchmark: String,
    pub raw: RawMetrics,
    pub phase: PhaseTag,
    pub cache_hit: bool,
}

/// Ordered evaluation log plus the running best objective after every
/// evaluation of the exhaustive and greedy phases.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseTrace {
    pub records: Vec<EvaluationRecord>,
    pub best_timeline: Vec<(PhaseTag, ObjectiveValue)>,
}

impl PhaseTrace {
    pub fn requests(&self, phase: PhaseTag) -> usize {
        self.records.iter().filter(|r| r.phase == phase).count()
    }

    pub fn misses(&self, phase: PhaseTag) -> usize {
        self.records
            .iter()
            .filter(|r| r.phase == phase && !r.cache_hit)
            .count()
    }
}

/// Output of the one-shot phase.
#[derive(Debug, Clone, PartialEq)]
pub struct OneShot {
    pub best: BestSettings,
    pub significance: SignificanceTable,
    pub norms: NormConstants,
}

/// Best configuration found so far with its metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct Incumbent {
    pub best: BestSettings,
    pub config: Configuration,
    pub raw: RawMetrics,
    pub objective: ObjectiveValue,
}

fn request<E: Evaluator>(
    cache: &CachedEvaluator<E>,
    config: &Configuration,
    benchmark: &BenchmarkId,
    phase: PhaseTag,
    trace: &mut PhaseTrace,
) -> Result<RawMetrics, ExploreError> {
    let lookup = cache
        .cached_evaluate(config, benchmark)
        .map_err(|source| ExploreError::Evaluation { phase, source })?;
    trace.records.push(EvaluationRecord {
        config: config.clone(),
        benchmark: benchmark.name.clone(),
        raw: lookup.raw,
        phase,
        cache_hit: lookup.cache_hit,
    });
    Ok(lookup.raw)
}

fn objective_of(raw: &RawMetrics, norms: &NormConstants, weights: &Weights, phase: PhaseTag) -> Result<ObjectiveValue, ExploreError> {
    score(raw, norms, weights).map_err(|source| ExploreError::Metrics { phase, source })
}

/// Phase I: probes each parameter at its first and last setting with every
/// other parameter at its first setting.
///
/// All probes are evaluated before any objective is computed, so the
/// normalization maxima cover every probe of this benchmark.
pub fn phase1_one_shot<E: Evaluator>(
    space: &DesignSpace,
    cache: &CachedEvaluator<E>,
    benchmark: &BenchmarkId,
    weights: &Weights,
    trace: &mut PhaseTrace,
) -> Result<OneShot, ExploreError> {
    let base = space.all_first();
    let mut probes = Vec::with_capacity(space.len());
    for p in space.parameters() {
        let first = request(cache, &base, benchmark, PhaseTag::Phase1, trace)?;
        let last_config = base.with(&p.name, p.last());
        let last = request(cache, &last_config, benchmark, PhaseTag::Phase1, trace)?;
        probes.push((first, last));
    }

    let norms = NormConstants::from_maxima(probes.iter().flat_map(|(f, l)| [f, l]))
        .expect("space has at least one parameter");

    let mut significance = Vec::with_capacity(space.len());
    let mut best = Vec::with_capacity(space.len());
    for (p, (first, last)) in space.parameters().iter().zip(&probes) {
        let f_first = objective_of(first, &norms, weights, PhaseTag::Phase1)?;
        let f_last = objective_of(last, &norms, weights, PhaseTag::Phase1)?;
        let d = f_last.value() - f_first.value();
        let chosen = if d > 0.0 { p.first() } else { p.last() };
        significance.push((p.name.clone(), d));
        best.push((p.name.clone(), chosen, Provenance::OneShot));
    }

    Ok(OneShot {
        best: BestSettings { entries: best },
        significance: SignificanceTable { entries: significance },
        norms,
    })
}

/// Phase II: sorts parameters by descending |significance| (stable) and
/// admits them to the exhaustive set while the product of their setting
/// counts stays within the threshold. The next `ceil(remaining / 2)`
/// parameters form the greedy set; the rest stay frozen.
pub fn phase2_partition(sig: &SignificanceTable, space: &DesignSpace, t: ExplorationThreshold) -> Partition {
    let magnitude = |i: usize| {
        sig.get(&space.parameters()[i].name)
            .map_or(0.0, f64::abs)
    };
    let mut order: Vec<usize> = (0..space.len()).collect();
    order.sort_by(|&a, &b| magnitude(b).total_cmp(&magnitude(a)));

    let threshold = t.get() as u128;
    let mut product = 1u128;
    let mut cut = 0;
    while cut < order.len() {
        let next = product.saturating_mul(space.parameters()[order[cut]].len() as u128);
        if next > threshold {
            break;
        }
        product = next;
        cut += 1;
    }
    let greedy_count = (order.len() - cut).div_ceil(2);
    let name = |i: &usize| space.parameters()[*i].name.clone();

    Partition {
        exhaustive: order[..cut].iter().map(name).collect(),
        greedy: order[cut..cut + greedy_count].iter().map(name).collect(),
        frozen: order[cut + greedy_count..].iter().map(name).collect(),
        index_order: order,
    }
}

/// Phase III: evaluates every assignment of the exhaustive set with the
/// other parameters at their one-shot best, keeping the strictly smallest
/// objective (first in enumeration order on ties).
///
/// With an empty exhaustive set the one-shot best configuration is
/// evaluated once to seed the incumbent.
#[allow(clippy::too_many_arguments)]
pub fn phase3_exhaustive<E: Evaluator>(
    space: &DesignSpace,
    partition: &Partition,
    best: &BestSettings,
    cache: &CachedEvaluator<E>,
    benchmark: &BenchmarkId,
    weights: &Weights,
    norms: &NormConstants,
    trace: &mut PhaseTrace,
) -> Result<Incumbent, ExploreError> {
    const PHASE: PhaseTag = PhaseTag::Phase3;
    let start = best.to_configuration(space);

    if partition.exhaustive.is_empty() {
        let raw = request(cache, &start, benchmark, PHASE, trace)?;
        let objective = objective_of(&raw, norms, weights, PHASE)?;
        trace.best_timeline.push((PHASE, objective));
        return Ok(Incumbent {
            best: best.clone(),
            config: start,
            raw,
            objective,
        });
    }

    // enumerate in space order, as the partial space is built parameter by parameter
    let exhaustive: Vec<&str> = space
        .names()
        .filter(|n| partition.exhaustive.iter().any(|e| e == n))
        .collect();
    let fixed: Vec<&str> = space.names().filter(|n| !exhaustive.contains(n)).collect();
    let fixed_part = start.restrict(&fixed);

    let mut incumbent: Option<(Configuration, RawMetrics, ObjectiveValue)> = None;
    let partials = space
        .enumerate_partial(&exhaustive)
        .expect("partition names come from the space");
    for partial in partials {
        let config = space
            .compose(&partial, &fixed_part)
            .expect("exhaustive and fixed parts are complementary");
        let raw = request(cache, &config, benchmark, PHASE, trace)?;
        let objective = objective_of(&raw, norms, weights, PHASE)?;
        if incumbent.as_ref().is_none_or(|(_, _, b)| objective < *b) {
            incumbent = Some((config, raw, objective));
        }
        trace.best_timeline.push((PHASE, incumbent.as_ref().expect("set above").2));
    }

    let (config, raw, objective) = incumbent.expect("partial space is never empty");
    let mut updated = best.clone();
    for name in &exhaustive {
        updated.set(name, config.get(name).expect("complete"), Provenance::Exhaustive);
    }
    Ok(Incumbent {
        best: updated,
        config,
        raw,
        objective,
    })
}

/// Orders a greedy parameter's settings so the sweep starts from the end
/// the one-shot phase preferred.
fn sweep_order(settings: &[Setting], significance: f64) -> Vec<Setting> {
    let mut ordered = settings.to_vec();
    if significance < 0.0 {
        ordered.reverse();
    }
    ordered
}

/// Phase IV: sweeps each greedy parameter, accepting strict improvements
/// and stopping at the first non-improving setting. Re-visiting the
/// incumbent's own setting never stops the sweep.
#[allow(clippy::too_many_arguments)]
pub fn phase4_greedy<E: Evaluator>(
    space: &DesignSpace,
    partition: &Partition,
    sig: &SignificanceTable,
    incumbent: Incumbent,
    cache: &CachedEvaluator<E>,
    benchmark: &BenchmarkId,
    weights: &Weights,
    norms: &NormConstants,
    trace: &mut PhaseTrace,
) -> Result<Incumbent, ExploreError> {
    const PHASE: PhaseTag = PhaseTag::Phase4;
    let mut current = incumbent;
    for name in &partition.greedy {
        let spec = space.parameter(name).expect("partition names come from the space");
        let d = sig.get(name).unwrap_or(0.0);
        for value in sweep_order(&spec.settings, d) {
            let holding = current.config.get(name).expect("complete");
            let config = current.config.with(name, value);
            let raw = request(cache, &config, benchmark, PHASE, trace)?;
            let objective = objective_of(&raw, norms, weights, PHASE)?;
            if objective < current.objective {
                current.best.set(name, value, Provenance::Greedy);
                current.config = config;
                current.raw = raw;
                current.objective = objective;
            } else if value != holding {
                trace.best_timeline.push((PHASE, current.objective));
                break;
            }
            trace.best_timeline.push((PHASE, current.objective));
        }
    }
    Ok(current)
}

/// Requests and unique evaluations attributed to one phase.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseCounts {
    pub requested: u64,
    pub unique: u64,
}

/// Everything the methodology produced for one benchmark.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkOutcome {
    pub benchmark: BenchmarkId,
    pub config: Configuration,
    pub raw: RawMetrics,
    pub normalized: NormalizedMetrics,
    pub objective: ObjectiveValue,
    pub norms: NormConstants,
    pub significance: SignificanceTable,
    pub best: BestSettings,
    pub partition: Partition,
    /// Objective of the one-shot best configuration, as first evaluated.
    pub one_shot_objective: ObjectiveValue,
    pub counter: EvaluationCounter,
    pub phase_counts: Vec<(PhaseTag, PhaseCounts)>,
    pub cardinality: u128,
    pub explored_fraction: f64,
    pub trace: PhaseTrace,
}

/// Runs all four phases for one benchmark.
pub fn explore_benchmark<E: Evaluator>(
    space: &DesignSpace,
    cache: &CachedEvaluator<E>,
    benchmark: &BenchmarkId,
    weights: &Weights,
    t: ExplorationThreshold,
) -> Result<BenchmarkOutcome, ExploreError> {
    let mut trace = PhaseTrace::default();
    let one_shot = phase1_one_shot(space, cache, benchmark, weights, &mut trace)?;
    let partition = phase2_partition(&one_shot.significance, space, t);

    let phase3_start = trace.records.len();
    let after_exhaustive = phase3_exhaustive(
        space,
        &partition,
        &one_shot.best,
        cache,
        benchmark,
        weights,
        &one_shot.norms,
        &mut trace,
    )?;
    let start_config = one_shot.best.to_configuration(space);
    let one_shot_raw = trace.records[phase3_start..]
        .iter()
        .find(|r| r.config == start_config)
        .map(|r| r.raw)
        .expect("phase III always evaluates the one-shot best configuration");
    let one_shot_objective = objective_of(&one_shot_raw, &one_shot.norms, weights, PhaseTag::Phase3)?;

    let fin = phase4_greedy(
        space,
        &partition,
        &one_shot.significance,
        after_exhaustive,
        cache,
        benchmark,
        weights,
        &one_shot.norms,
        &mut trace,
    )?;

    let counter = cache.counter(&benchmark.name);
    let cardinality = space.cardinality();
    let phase_counts = [PhaseTag::Phase1, PhaseTag::Phase3, PhaseTag::Phase4]
        .into_iter()
        .map(|p| {
            (
                p,
                PhaseCounts {
                    requested: trace.requests(p) as u64,
                    unique: trace.misses(p) as u64,
                },
            )
        })
        .collect();
    let normalized = normalize(&fin.raw, &one_shot.norms).map_err(|source| ExploreError::Metrics {
        phase: PhaseTag::Phase4,
        source,
    })?;

    Ok(BenchmarkOutcome {
        benchmark: benchmark.clone(),
        config: fin.config,
        raw: fin.raw,
        normalized,
        objective: fin.objective,
        norms: one_shot.norms,
        significance: one_shot.significance,
        best: fin.best,
        partition,
        one_shot_objective,
        counter,
        phase_counts,
        cardinality,
        explored_fraction: counter.unique_configs as f64 / cardinality as f64,
        trace,
    })
}

/// Explores every benchmark independently, up to `jobs` at a time, sharing
/// one evaluation cache. Results are in benchmark order; a failing benchmark
/// does not affect the others.
pub fn explore<E: Evaluator>(
    space: &DesignSpace,
    cache: &CachedEvaluator<E>,
    benchmarks: &[BenchmarkId],
    weights: &Weights,
    t: ExplorationThreshold,
    jobs: usize,
) -> Vec<Result<BenchmarkOutcome, ExploreError>> {
    let jobs = jobs.clamp(1, benchmarks.len().max(1));
    if jobs == 1 {
        return benchmarks
            .iter()
            .map(|b| explore_benchmark(space, cache, b, weights, t))
            .collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Result<BenchmarkOutcome, ExploreError>>>> =
        benchmarks.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(b) = benchmarks.get(i) else { break };
                let result = explore_benchmark(space, cache, b, weights, t);
                *slots[i].lock().expect("result slot poisoned") = Some(result);
            });
        }
    });
    slots
        .into_iter()
        .map(|s| s.into_inner().expect("result slot poisoned").expect("every benchmark ran"))
        .collect()
}
