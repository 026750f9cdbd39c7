use std::collections::HashSet;

use archex::analysis::{full_exhaustive, DEFAULT_ORACLE_BUDGET};
use archex::cost_model::{
    generate_workload, CostModelEvaluator, PowerModelParams, CORES, FREQUENCY, L1_D, L1_I, L2, L3, MODEL_PARAMETERS,
};
use archex::evaluator::{BenchmarkId, CachedEvaluator, Category, Evaluator};
use archex::explorer::{explore_benchmark, phase1_one_shot, phase2_partition, ExplorationThreshold, PhaseTag, PhaseTrace};
use archex::metrics::{score, Weights};
use archex::presets::{high_performance_space, low_power_space};
use archex::space::{DesignSpace, ParameterSpec, Setting};
use proptest::prelude::*;

const CANDIDATES: [&[i64]; 6] = [
    &[1, 2, 4, 8],
    &[75, 150, 1700, 2200, 3200],
    &[8, 16, 32, 64, 128],
    &[8, 16, 32, 64, 128],
    &[256, 512, 1024],
    &[2048, 4096, 8192],
];

/// A random sub-space of the six model parameters, each with 1..=4 settings.
fn arb_space() -> impl Strategy<Value = DesignSpace> {
    let per_param: Vec<_> = CANDIDATES
        .iter()
        .map(|c| proptest::sample::subsequence(c.to_vec(), 1..=c.len().min(4)))
        .collect();
    per_param.prop_map(|chosen| {
        DesignSpace::new(
            MODEL_PARAMETERS
                .iter()
                .zip(chosen)
                .map(|(name, values)| ParameterSpec::new(*name, values.into_iter().map(Setting::from)))
                .collect(),
        )
        .unwrap()
    })
}

fn arb_weights() -> impl Strategy<Value = Weights> {
    (0u32..=10).prop_map(|k| Weights::new(k as f64 / 10.0, 1.0 - k as f64 / 10.0).unwrap())
}

fn evaluator(seed: u64, cat: usize) -> (CostModelEvaluator, BenchmarkId) {
    let bench = BenchmarkId::new("w", Category::ALL[cat]);
    let eval = CostModelEvaluator::new(PowerModelParams::HIGH_PERFORMANCE)
        .unwrap()
        .with_workload("w", generate_workload(seed, Category::ALL[cat]))
        .unwrap();
    (eval, bench)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn run_invariants(space in arb_space(), w in arb_weights(), t in 1u64..200, seed in any::<u64>(), cat in 0usize..5) {
        let (eval, bench) = evaluator(seed, cat);
        let cache = CachedEvaluator::new(&eval);
        let out = explore_benchmark(&space, &cache, &bench, &w, ExplorationThreshold::new(t).unwrap()).unwrap();

        // phases appear in order
        let phases: Vec<PhaseTag> = out.trace.records.iter().map(|r| r.phase).collect();
        let mut sorted = phases.clone();
        sorted.sort_by_key(|p| match p { PhaseTag::Phase1 => 0, PhaseTag::Phase3 => 1, _ => 2 });
        prop_assert_eq!(phases, sorted);

        // best objective never goes up
        prop_assert!(out.trace.best_timeline.windows(2).all(|p| p[1].1 <= p[0].1));

        // never worse than the starting point
        prop_assert!(out.objective <= out.one_shot_objective);
        prop_assert!(space.check(&out.config).is_ok());

        // partition shape
        let p = &out.partition;
        let mut all: Vec<&String> = p.exhaustive.iter().chain(&p.greedy).chain(&p.frozen).collect();
        prop_assert_eq!(all.len(), space.len());
        all.sort();
        all.dedup();
        prop_assert_eq!(all.len(), space.len());
        prop_assert!(p.exhaustive_size(&space) <= t as u128);
        prop_assert_eq!(p.greedy.len(), (space.len() - p.exhaustive.len()).div_ceil(2));

        // evaluation accounting
        prop_assert!(out.counter.unique_configs as u128 <= p.evaluation_ceiling(&space));
        let distinct: HashSet<_> = out.trace.records.iter().map(|r| &r.config).collect();
        prop_assert_eq!(out.counter.unique_configs as usize, distinct.len());
        prop_assert_eq!(out.counter.total_calls as usize, out.trace.records.len());
        prop_assert_eq!(out.explored_fraction, out.counter.unique_configs as f64 / space.cardinality() as f64);
    }

    #[test]
    fn full_threshold_equals_brute_force(space in arb_space(), w in arb_weights(), seed in any::<u64>(), cat in 0usize..5) {
        let (eval, bench) = evaluator(seed, cat);
        let cache = CachedEvaluator::new(&eval);
        let t = ExplorationThreshold::new(space.cardinality() as u64).unwrap();
        let out = explore_benchmark(&space, &cache, &bench, &w, t).unwrap();
        let oracle = full_exhaustive(&space, &eval, &bench, &w, &out.norms, DEFAULT_ORACLE_BUDGET, 1).unwrap();
        prop_assert_eq!(out.objective, oracle.objective);
        prop_assert_eq!(out.config, oracle.config);
    }

    #[test]
    fn cache_is_transparent(space in arb_space(), seed in any::<u64>(), cat in 0usize..5, picks in proptest::collection::vec(any::<prop::sample::Index>(), 1..40)) {
        let (eval, bench) = evaluator(seed, cat);
        let cache = CachedEvaluator::new(&eval);
        let configs: Vec<_> = space.enumerate().collect();
        let mut distinct = HashSet::new();
        for i in picks {
            let c = &configs[i.index(configs.len())];
            let direct = eval.evaluate(c, &bench).unwrap();
            let cached = cache.evaluate(c, &bench).unwrap();
            prop_assert_eq!(direct.power_watts.to_bits(), cached.power_watts.to_bits());
            prop_assert_eq!(direct.exec_time_ms.to_bits(), cached.exec_time_ms.to_bits());
            distinct.insert(c.clone());
        }
        prop_assert_eq!(cache.counter("w").unique_configs as usize, distinct.len());
    }

    #[test]
    fn power_only_significance_points_to_first_settings(seed in any::<u64>(), cat in 0usize..5) {
        let (eval, bench) = evaluator(seed, cat);
        let space = high_performance_space();
        let cache = CachedEvaluator::new(&eval);
        let w = Weights::new(1.0, 0.0).unwrap();
        let one_shot = phase1_one_shot(&space, &cache, &bench, &w, &mut PhaseTrace::default()).unwrap();
        for p in space.parameters() {
            prop_assert!(one_shot.significance.get(&p.name).unwrap() >= 0.0);
            prop_assert_eq!(one_shot.best.get(&p.name).unwrap(), p.first());
        }
        let partition = phase2_partition(&one_shot.significance, &space, ExplorationThreshold::new(150).unwrap());
        prop_assert!(partition.exhaustive_size(&space) <= 150);
    }

    #[test]
    fn single_metric_weights_pick_raw_argmin(space in arb_space(), seed in any::<u64>(), cat in 0usize..5) {
        let (eval, bench) = evaluator(seed, cat);
        let cache = CachedEvaluator::new(&eval);
        let t = ExplorationThreshold::new(150).unwrap();
        let norms = explore_benchmark(&space, &cache, &bench, &Weights::new(0.5, 0.5).unwrap(), t).unwrap().norms;
        for (w, by_power) in [(Weights::new(1.0, 0.0).unwrap(), true), (Weights::new(0.0, 1.0).unwrap(), false)] {
            let oracle = full_exhaustive(&space, &eval, &bench, &w, &norms, DEFAULT_ORACLE_BUDGET, 1).unwrap();
            let key = |r: &archex::metrics::RawMetrics| if by_power { r.power_watts } else { r.exec_time_ms };
            let min = oracle.records.iter().map(|r| key(&r.raw)).fold(f64::INFINITY, f64::min);
            prop_assert_eq!(key(&oracle.raw), min);
            prop_assert_eq!(oracle.objective, score(&oracle.raw, &norms, &w).unwrap());
        }
    }
}

#[test]
fn model_optima_are_the_extreme_configurations() {
    for (space, power) in [
        (low_power_space(), PowerModelParams::LOW_POWER),
        (high_performance_space(), PowerModelParams::HIGH_PERFORMANCE),
    ] {
        for seed in 0..10u64 {
            let cat = Category::ALL[(seed % 5) as usize];
            let bench = BenchmarkId::new("w", cat);
            let eval = CostModelEvaluator::new(power)
                .unwrap()
                .with_workload("w", generate_workload(seed, cat))
                .unwrap();
            let cache = CachedEvaluator::new(&eval);
            let t = ExplorationThreshold::new(150).unwrap();
            let norms = explore_benchmark(&space, &cache, &bench, &Weights::new(0.5, 0.5).unwrap(), t)
                .unwrap()
                .norms;

            let power_only = Weights::new(1.0, 0.0).unwrap();
            let oracle = full_exhaustive(&space, &eval, &bench, &power_only, &norms, DEFAULT_ORACLE_BUDGET, 4).unwrap();
            assert_eq!(oracle.config, space.all_first());

            // time is flat in a cache once the working set outgrows it, so
            // the all-maximum point is *an* optimum rather than the first one
            let time_only = Weights::new(0.0, 1.0).unwrap();
            let oracle = full_exhaustive(&space, &eval, &bench, &time_only, &norms, DEFAULT_ORACLE_BUDGET, 4).unwrap();
            let at_max = eval.evaluate(&space.all_last(), &bench).unwrap();
            assert_eq!(oracle.raw.exec_time_ms, at_max.exec_time_ms);
        }
    }
}

#[test]
fn power_only_search_on_low_power_space_finds_all_minimum() {
    let space = low_power_space();
    for seed in 0..20u64 {
        let cat = Category::ALL[(seed % 5) as usize];
        let bench = BenchmarkId::new("w", cat);
        let eval = CostModelEvaluator::new(PowerModelParams::LOW_POWER)
            .unwrap()
            .with_workload("w", generate_workload(seed, cat))
            .unwrap();
        let cache = CachedEvaluator::new(&eval);
        let out = explore_benchmark(
            &space,
            &cache,
            &bench,
            &Weights::new(1.0, 0.0).unwrap(),
            ExplorationThreshold::new(150).unwrap(),
        )
        .unwrap();
        assert_eq!(out.config, space.all_first());
        for name in [CORES, FREQUENCY, L1_I, L1_D, L2, L3] {
            assert_eq!(out.config.get(name), space.parameter(name).map(|p| p.first()));
        }
    }
}
