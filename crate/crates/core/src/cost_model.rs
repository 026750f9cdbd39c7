//! Built-in analytic evaluator.
//!
//! Execution time and power are closed-form functions of the six
//! microarchitecture parameters (`Cores`, `Frequency` in MHz, and the
//! `L1-I`, `L1-D`, `L2`, `L3` cache sizes in kB) and a synthetic
//! [`WorkloadProfile`].
//!
//! Execution time, in milliseconds:
//!
//! ```text
//! speedup   = 1 / ((1 - parallel_fraction) + parallel_fraction / Cores)
//! miss(w,c,e) = min(1, (w / c)^e)
//! g1 = miss(inst_ws, L1-I, l1_locality) + miss(data_ws, L1-D, l1_locality)
//! g2 = g1 * miss(inst_ws + data_ws, L2, l2_locality)
//! g3 = g2 * miss(inst_ws + data_ws, L3, l3_locality)
//! cpi = base_cpi + mem_access_fraction * (g1*penalty_l1 + g2*penalty_l2 + g3*penalty_l3)
//! time_ms = instruction_count * cpi / (Frequency * 1e3 * speedup)
//! ```
//!
//! Each level only sees the misses of the level above it. Penalties are in
//! cycles; `penalty_l3` is the cost of going to main memory.
//!
//! Power, in watts:
//!
//! ```text
//! power = Cores * cap_per_core * (Frequency / 1000)^3
//!       + Cores * leak_per_core
//!       + leak_per_kb_cache * (L1-I + L1-D + L2 + L3)
//!       + idle_floor
//! ```
//!
//! Time is strictly decreasing in `Frequency` and non-increasing in `Cores`
//! and every cache size; power is strictly increasing in `Frequency` and
//! `Cores` and non-decreasing in every cache size.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::evaluator::{BenchmarkId, Category, EvaluationError, Evaluator};
use crate::metrics::RawMetrics;
use crate::space::Configuration;

pub const CORES: &str = "Cores";
pub const FREQUENCY: &str = "Frequency";
pub const L1_I: &str = "L1-I";
pub const L1_D: &str = "L1-D";
pub const L2: &str = "L2";
pub const L3: &str = "L3";

/// Parameters the model reads from every configuration.
pub const MODEL_PARAMETERS: [&str; 6] = [CORES, FREQUENCY, L1_I, L1_D, L2, L3];

/// Reference frequency of the dynamic power term, in MHz.
pub const F_REF_MHZ: f64 = 1000.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CostModelError {
    #[error("configuration lacks model parameter `{0}`")]
    MissingParameter(&'static str),
    #[error("model parameter `{name}` must be positive, got {value}")]
    NonPositiveParameter { name: &'static str, value: f64 },
    #[error("invalid workload profile `{name}`: {reason}")]
    InvalidWorkload { name: String, reason: String },
    #[error("invalid power model: {0}")]
    InvalidPowerModel(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkloadProfile {
    pub name: String,
    pub instruction_count: f64,
    pub parallel_fraction: f64,
    pub base_cpi: f64,
    /// kB
    pub inst_working_set: f64,
    /// kB
    pub data_working_set: f64,
    pub l1_locality: f64,
    pub l2_locality: f64,
    pub l3_locality: f64,
    pub miss_penalty_l1: f64,
    pub miss_penalty_l2: f64,
    pub miss_penalty_l3: f64,
    pub mem_access_fraction: f64,
}

impl WorkloadProfile {
    pub fn validate(&self) -> Result<(), CostModelError> {
        let fail = |reason: String| {
            Err(CostModelError::InvalidWorkload {
                name: self.name.clone(),
                reason,
            })
        };
        let positive = [
            ("instruction_count", self.instruction_count),
            ("base_cpi", self.base_cpi),
            ("inst_working_set", self.inst_working_set),
            ("data_working_set", self.data_working_set),
            ("l1_locality", self.l1_locality),
            ("l2_locality", self.l2_locality),
            ("l3_locality", self.l3_locality),
        ];
        for (field, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return fail(format!("{field} must be positive, got {v}"));
            }
        }
        for (field, v) in [
            ("miss_penalty_l1", self.miss_penalty_l1),
            ("miss_penalty_l2", self.miss_penalty_l2),
            ("miss_penalty_l3", self.miss_penalty_l3),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return fail(format!("{field} must be non-negative, got {v}"));
            }
        }
        for (field, v) in [
            ("parallel_fraction", self.parallel_fraction),
            ("mem_access_fraction", self.mem_access_fraction),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return fail(format!("{field} must lie in [0, 1], got {v}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerModelParams {
    /// Dynamic power of one core at `F_REF_MHZ`, in watts.
    pub cap_per_core: f64,
    pub leak_per_core: f64,
    pub leak_per_kb_cache: f64,
    pub idle_floor: f64,
}

impl PowerModelParams {
    /// Coefficients for sub-200 MHz embedded cores, where dynamic power
    /// dominates the total at every frequency of the low-power space.
    pub const LOW_POWER: PowerModelParams = PowerModelParams {
        cap_per_core: 142.0,
        leak_per_core: 0.02,
        leak_per_kb_cache: 3.0e-6,
        idle_floor: 0.005,
    };

    /// Coefficients for GHz-class host cores, where per-core leakage
    /// outweighs the dynamic term.
    pub const HIGH_PERFORMANCE: PowerModelParams = PowerModelParams {
        cap_per_core: 0.002,
        leak_per_core: 0.8,
        leak_per_kb_cache: 2.0e-5,
        idle_floor: 0.1,
    };

    pub fn validate(&self) -> Result<(), CostModelError> {
        let all = [
            self.cap_per_core,
            self.leak_per_core,
            self.leak_per_kb_cache,
            self.idle_floor,
        ];
        if all.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(CostModelError::InvalidPowerModel(
                "coefficients must be finite and non-negative".into(),
            ));
        }
        if all.iter().all(|v| *v == 0.0) {
            return Err(CostModelError::InvalidPowerModel(
                "at least one coefficient must be positive".into(),
            ));
        }
        Ok(())
    }
}

struct Point {
    cores: f64,
    freq_mhz: f64,
    l1i: f64,
    l1d: f64,
    l2: f64,
    l3: f64,
}

fn read(config: &Configuration) -> Result<Point, CostModelError> {
    let get = |name: &'static str| -> Result<f64, CostModelError> {
        let v = config
            .get(name)
            .ok_or(CostModelError::MissingParameter(name))?
            .to_f64();
        if v.is_finite() && v > 0.0 {
            Ok(v)
        } else {
            Err(CostModelError::NonPositiveParameter { name, value: v })
        }
    };
    Ok(Point {
        cores: get(CORES)?,
        freq_mhz: get(FREQUENCY)?,
        l1i: get(L1_I)?,
        l1d: get(L1_D)?,
        l2: get(L2)?,
        l3: get(L3)?,
    })
}

fn miss_rate(working_set: f64, capacity: f64, exponent: f64) -> f64 {
    (working_set / capacity).powf(exponent).min(1.0)
}

/// Amdahl speedup on `cores` cores.
pub fn amdahl(parallel_fraction: f64, cores: f64) -> f64 {
    1.0 / ((1.0 - parallel_fraction) + parallel_fraction / cores)
}

/// Cycles per instruction including memory stalls.
pub fn effective_cpi(config: &Configuration, w: &WorkloadProfile) -> Result<f64, CostModelError> {
    let p = read(config)?;
    let footprint = w.inst_working_set + w.data_working_set;
    let g1 = miss_rate(w.inst_working_set, p.l1i, w.l1_locality) + miss_rate(w.data_working_set, p.l1d, w.l1_locality);
    let g2 = g1 * miss_rate(footprint, p.l2, w.l2_locality);
    let g3 = g2 * miss_rate(footprint, p.l3, w.l3_locality);
    Ok(w.base_cpi
        + w.mem_access_fraction * (g1 * w.miss_penalty_l1 + g2 * w.miss_penalty_l2 + g3 * w.miss_penalty_l3))
}

/// Execution time in milliseconds.
pub fn exec_time(config: &Configuration, w: &WorkloadProfile) -> Result<f64, CostModelError> {
    let p = read(config)?;
    let cpi = effective_cpi(config, w)?;
    Ok(w.instruction_count * cpi / (p.freq_mhz * 1e3 * amdahl(w.parallel_fraction, p.cores)))
}

/// Total dynamic plus leakage power in watts.
pub fn power(config: &Configuration, params: &PowerModelParams) -> Result<f64, CostModelError> {
    let p = read(config)?;
    Ok(p.cores * params.cap_per_core * (p.freq_mhz / F_REF_MHZ).powi(3)
        + p.cores * params.leak_per_core
        + params.leak_per_kb_cache * (p.l1i + p.l1d + p.l2 + p.l3)
        + params.idle_floor)
}

/// Inclusive-exclusive sampling ranges for one category.
struct Ranges {
    instruction_count: (f64, f64),
    parallel_fraction: (f64, f64),
    base_cpi: (f64, f64),
    inst_working_set: (f64, f64),
    data_working_set: (f64, f64),
    mem_access_fraction: (f64, f64),
}

/// Sampling ranges per category. Shared by all categories: `l1_locality`
/// in [0.3, 0.8), `l2_locality` in [0.4, 1.0), `l3_locality` in [0.5, 1.2),
/// penalties of [8, 14), [25, 45) and [120, 250) cycles.
fn ranges(category: Category) -> Ranges {
    match category {
        Category::DataSensingAggregation => Ranges {
            instruction_count: (1.0e7, 4.0e7),
            parallel_fraction: (0.1, 0.5),
            base_cpi: (1.0, 1.6),
            inst_working_set: (4.0, 24.0),
            data_working_set: (16.0, 96.0),
            mem_access_fraction: (0.2, 0.35),
        },
        Category::DataAnalysisMining => Ranges {
            instruction_count: (2.0e7, 8.0e7),
            parallel_fraction: (0.5, 0.95),
            base_cpi: (0.9, 1.5),
            inst_working_set: (8.0, 32.0),
            data_working_set: (64.0, 256.0),
            mem_access_fraction: (0.25, 0.4),
        },
        Category::Graphics => Ranges {
            instruction_count: (2.0e7, 8.0e7),
            parallel_fraction: (0.6, 0.9),
            base_cpi: (1.0, 1.8),
            inst_working_set: (8.0, 24.0),
            data_working_set: (96.0, 512.0),
            mem_access_fraction: (0.25, 0.45),
        },
        Category::SignalProcessingCommunication => Ranges {
            instruction_count: (1.0e7, 6.0e7),
            parallel_fraction: (0.3, 0.7),
            base_cpi: (0.8, 1.4),
            inst_working_set: (48.0, 160.0),
            data_working_set: (8.0, 40.0),
            mem_access_fraction: (0.15, 0.3),
        },
        Category::Uncategorized => Ranges {
            instruction_count: (1.0e7, 8.0e7),
            parallel_fraction: (0.0, 0.95),
            base_cpi: (0.8, 2.0),
            inst_working_set: (4.0, 160.0),
            data_working_set: (8.0, 512.0),
            mem_access_fraction: (0.1, 0.45),
        },
    }
}

/// Draws a deterministic synthetic workload for `(seed, category)`.
pub fn generate_workload(seed: u64, category: Category) -> WorkloadProfile {
    let r = ranges(category);
    let salt = Category::ALL.iter().position(|c| *c == category).unwrap_or(0) as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let mut draw = |(lo, hi): (f64, f64)| rng.gen_range(lo..hi);
    WorkloadProfile {
        name: format!("{category}-{seed}"),
        instruction_count: draw(r.instruction_count).round(),
        parallel_fraction: draw(r.parallel_fraction),
        base_cpi: draw(r.base_cpi),
        inst_working_set: draw(r.inst_working_set),
        data_working_set: draw(r.data_working_set),
        l1_locality: draw((0.3, 0.8)),
        l2_locality: draw((0.4, 1.0)),
        l3_locality: draw((0.5, 1.2)),
        miss_penalty_l1: draw((8.0, 14.0)),
        miss_penalty_l2: draw((25.0, 45.0)),
        miss_penalty_l3: draw((120.0, 250.0)),
        mem_access_fraction: draw(r.mem_access_fraction),
    }
}

/// Per-benchmark seed derived from the run seed and the benchmark name, so
/// reordering benchmarks does not change their workloads.
pub fn benchmark_seed(run_seed: u64, benchmark: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(run_seed.to_le_bytes());
    hasher.update(benchmark.as_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

/// Analytic evaluator holding one workload profile per benchmark.
#[derive(Debug, Clone)]
pub struct CostModelEvaluator {
    power: PowerModelParams,
    workloads: HashMap<String, WorkloadProfile>,
}

impl CostModelEvaluator {
    pub fn new(power: PowerModelParams) -> Result<Self, CostModelError> {
        power.validate()?;
        Ok(CostModelEvaluator {
            power,
            workloads: HashMap::new(),
        })
    }

    pub fn with_workload(mut self, benchmark: &str, profile: WorkloadProfile) -> Result<Self, CostModelError> {
        profile.validate()?;
        self.workloads.insert(benchmark.to_string(), profile);
        Ok(self)
    }

    /// Registers a generated workload for each benchmark.
    pub fn seeded<'a>(
        power: PowerModelParams,
        run_seed: u64,
        benchmarks: impl IntoIterator<Item = &'a BenchmarkId>,
    ) -> Result<Self, CostModelError> {
        let mut eval = CostModelEvaluator::new(power)?;
        for b in benchmarks {
            let profile = generate_workload(benchmark_seed(run_seed, &b.name), b.category);
            eval = eval.with_workload(&b.name, profile)?;
        }
        Ok(eval)
    }

    pub fn workload(&self, benchmark: &str) -> Option<&WorkloadProfile> {
        self.workloads.get(benchmark)
    }

    pub fn power_params(&self) -> &PowerModelParams {
        &self.power
    }
}

impl Evaluator for CostModelEvaluator {
    fn evaluate(&self, config: &Configuration, benchmark: &BenchmarkId) -> Result<RawMetrics, EvaluationError> {
        let w = self
            .workloads
            .get(&benchmark.name)
            .ok_or_else(|| EvaluationError::UnknownBenchmark(benchmark.name.clone()))?;
        let time = exec_time(config, w)?;
        let watts = power(config, &self.power)?;
        Ok(RawMetrics::new(watts, time)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{DesignSpace, ParameterSpec, Setting};
    use proptest::prelude::*;

    fn param(name: &str, values: &[i64]) -> ParameterSpec {
        ParameterSpec::new(name, values.iter().map(|&v| Setting::from(v)))
    }

    fn low_power_space() -> DesignSpace {
        DesignSpace::new(vec![
            param(CORES, &[1, 2, 4]),
            param(FREQUENCY, &[75, 100, 125, 150]),
            param(L1_I, &[8, 16, 32, 64]),
            param(L1_D, &[8, 16, 32, 64]),
            param(L2, &[256, 512, 1024]),
            param(L3, &[2048, 4096]),
        ])
        .unwrap()
    }

    fn cfg(cores: i64, freq: i64, l1i: i64, l1d: i64, l2: i64, l3: i64) -> Configuration {
        let space = DesignSpace::new(vec![
            param(CORES, &[cores]),
            param(FREQUENCY, &[freq]),
            param(L1_I, &[l1i]),
            param(L1_D, &[l1d]),
            param(L2, &[l2]),
            param(L3, &[l3]),
        ])
        .unwrap();
        space.all_first()
    }

    fn flat(parallel_fraction: f64) -> WorkloadProfile {
        WorkloadProfile {
            name: "flat".into(),
            instruction_count: 1.0e7,
            parallel_fraction,
            base_cpi: 1.0,
            inst_working_set: 16.0,
            data_working_set: 64.0,
            l1_locality: 0.5,
            l2_locality: 0.7,
            l3_locality: 0.9,
            miss_penalty_l1: 0.0,
            miss_penalty_l2: 0.0,
            miss_penalty_l3: 0.0,
            mem_access_fraction: 0.3,
        }
    }

    #[test]
    fn serial_workload_ignores_cores() {
        let w = flat(0.0);
        let one = exec_time(&cfg(1, 100, 8, 8, 256, 2048), &w).unwrap();
        let four = exec_time(&cfg(4, 100, 8, 8, 256, 2048), &w).unwrap();
        assert_eq!(one, four);
    }

    #[test]
    fn doubling_frequency_halves_time_without_stalls() {
        let w = flat(0.5);
        let slow = exec_time(&cfg(2, 1600, 8, 8, 256, 2048), &w).unwrap();
        let fast = exec_time(&cfg(2, 3200, 8, 8, 256, 2048), &w).unwrap();
        assert!((slow / fast - 2.0).abs() < 1e-12);
        // 1e7 instructions at CPI 1 on 1600 MHz with speedup 1/(0.5+0.25)
        assert!((slow - 1.0e7 / (1600.0 * 1e3) * 0.75).abs() < 1e-12);
    }

    #[test]
    fn frequency_ratio_for_analysis_preset() {
        let mut w = generate_workload(11, Category::DataAnalysisMining);
        let lo = cfg(2, 1700, 32, 32, 512, 4096);
        let hi = cfg(2, 3200, 32, 32, 512, 4096);
        // penalties are in cycles, so the ratio is exactly the frequency ratio
        let ratio = exec_time(&hi, &w).unwrap() / exec_time(&lo, &w).unwrap();
        assert!((ratio - 1700.0 / 3200.0).abs() < 1e-12);
        w.mem_access_fraction = 0.0;
        let ratio = exec_time(&hi, &w).unwrap() / exec_time(&lo, &w).unwrap();
        assert!((ratio - 1700.0 / 3200.0).abs() < 1e-12);
    }

    #[test]
    fn stall_term_matches_hand_computation() {
        let mut w = flat(0.0);
        w.miss_penalty_l1 = 10.0;
        w.miss_penalty_l2 = 30.0;
        w.miss_penalty_l3 = 200.0;
        let c = cfg(1, 100, 32, 128, 256, 2048);
        // L1-I: 16/32 -> 0.5^0.5; L1-D: 64/128 -> 0.5^0.5
        let g1 = 2.0 * 0.5f64.sqrt();
        let g2 = g1 * (80.0f64 / 256.0).powf(0.7);
        let g3 = g2 * (80.0f64 / 2048.0).powf(0.9);
        let expected = 1.0 + 0.3 * (g1 * 10.0 + g2 * 30.0 + g3 * 200.0);
        assert!((effective_cpi(&c, &w).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn cubic_dynamic_power() {
        let p = PowerModelParams {
            cap_per_core: 1.0,
            leak_per_core: 0.0,
            leak_per_kb_cache: 0.0,
            idle_floor: 0.0,
        };
        let lo = power(&cfg(2, 1000, 8, 8, 256, 2048), &p).unwrap();
        let hi = power(&cfg(2, 2000, 8, 8, 256, 2048), &p).unwrap();
        assert!((hi / lo - 8.0).abs() < 1e-12);
        assert!((lo - 2.0).abs() < 1e-12);
    }

    #[test]
    fn leakage_only_power_ignores_frequency() {
        let p = PowerModelParams {
            cap_per_core: 0.0,
            leak_per_core: 0.1,
            leak_per_kb_cache: 0.001,
            idle_floor: 0.05,
        };
        let a = power(&cfg(2, 1000, 8, 8, 256, 2048), &p).unwrap();
        let b = power(&cfg(2, 3000, 8, 8, 256, 2048), &p).unwrap();
        assert_eq!(a, b);
        assert!((a - (0.2 + 0.001 * 2320.0 + 0.05)).abs() < 1e-12);
    }

    #[test]
    fn low_power_floor_is_sub_watt() {
        let c = low_power_space().all_first();
        let watts = power(&c, &PowerModelParams::LOW_POWER).unwrap();
        // 142 * 0.075^3 + 0.02 + 3e-6 * 2320 + 0.005
        let expected = 142.0 * 0.075f64.powi(3) + 0.02 + 3.0e-6 * 2320.0 + 0.005;
        assert!((watts - expected).abs() < 1e-12);
        assert!((0.09..0.2).contains(&watts), "{watts}");
    }

    #[test]
    fn all_minimum_draws_less_power_than_all_maximum() {
        let space = low_power_space();
        let bench = BenchmarkId::new("cholesky", Category::DataSensingAggregation);
        let eval = CostModelEvaluator::seeded(PowerModelParams::LOW_POWER, 5, [&bench]).unwrap();
        let lo = eval.evaluate(&space.all_first(), &bench).unwrap();
        let hi = eval.evaluate(&space.all_last(), &bench).unwrap();
        assert!(lo.power_watts < hi.power_watts);
        assert_eq!(lo, eval.evaluate(&space.all_first(), &bench).unwrap());
    }

    #[test]
    fn missing_parameter_is_reported() {
        let space = DesignSpace::new(vec![param(CORES, &[1])]).unwrap();
        assert_eq!(
            exec_time(&space.all_first(), &flat(0.5)),
            Err(CostModelError::MissingParameter(FREQUENCY))
        );
        assert_eq!(
            power(&space.all_first(), &PowerModelParams::LOW_POWER),
            Err(CostModelError::MissingParameter(FREQUENCY))
        );
    }

    #[test]
    fn unknown_benchmark_fails() {
        let eval = CostModelEvaluator::new(PowerModelParams::LOW_POWER).unwrap();
        let err = eval
            .evaluate(&low_power_space().all_first(), &BenchmarkId::new("nope", Category::Graphics))
            .unwrap_err();
        assert!(matches!(err, EvaluationError::UnknownBenchmark(_)));
    }

    #[test]
    fn generator_is_deterministic_and_in_range() {
        for seed in 0..200 {
            for category in Category::ALL {
                let a = generate_workload(seed, category);
                assert_eq!(a, generate_workload(seed, category));
                a.validate().unwrap();
            }
            let sp = generate_workload(seed, Category::SignalProcessingCommunication);
            assert!(sp.inst_working_set > sp.data_working_set);
            let dm = generate_workload(seed, Category::DataAnalysisMining);
            assert!((0.5..=0.95).contains(&dm.parallel_fraction));
        }
    }

    #[test]
    fn power_params_validation() {
        assert!(PowerModelParams::LOW_POWER.validate().is_ok());
        assert!(PowerModelParams::HIGH_PERFORMANCE.validate().is_ok());
        let zero = PowerModelParams {
            cap_per_core: 0.0,
            leak_per_core: 0.0,
            leak_per_kb_cache: 0.0,
            idle_floor: 0.0,
        };
        assert!(zero.validate().is_err());
        let negative = PowerModelParams {
            leak_per_core: -1.0,
            ..PowerModelParams::LOW_POWER
        };
        assert!(negative.validate().is_err());
    }

    fn arb_config() -> impl Strategy<Value = (i64, i64, i64, i64, i64, i64)> {
        (1i64..16, 50i64..4000, 4i64..256, 4i64..256, 128i64..2048, 1024i64..16384)
    }

    proptest! {
        #[test]
        fn monotone_in_every_parameter(
            (c, f, i, d, l2, l3) in arb_config(),
            seed in 0u64..1000,
            cat in 0usize..5,
        ) {
            let w = generate_workload(seed, Category::ALL[cat]);
            let p = PowerModelParams::HIGH_PERFORMANCE;
            let base = cfg(c, f, i, d, l2, l3);
            let t0 = exec_time(&base, &w).unwrap();
            let p0 = power(&base, &p).unwrap();

            let faster = cfg(c, f + 1, i, d, l2, l3);
            prop_assert!(exec_time(&faster, &w).unwrap() < t0);
            prop_assert!(power(&faster, &p).unwrap() > p0);

            let wider = cfg(c + 1, f, i, d, l2, l3);
            prop_assert!(exec_time(&wider, &w).unwrap() <= t0);
            prop_assert!(power(&wider, &p).unwrap() > p0);

            for bigger in [
                cfg(c, f, i * 2, d, l2, l3),
                cfg(c, f, i, d * 2, l2, l3),
                cfg(c, f, i, d, l2 * 2, l3),
                cfg(c, f, i, d, l2, l3 * 2),
            ] {
                prop_assert!(exec_time(&bigger, &w).unwrap() <= t0);
                prop_assert!(power(&bigger, &p).unwrap() >= p0);
            }
        }
    }
}
