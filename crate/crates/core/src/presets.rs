//! Bundled fixtures: the two reference design spaces, their weight pairs
//! and named stand-in benchmarks per workload category.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cost_model::{PowerModelParams, CORES, FREQUENCY, L1_D, L1_I, L2, L3};
use crate::evaluator::{BenchmarkId, Category};
use crate::metrics::Weights;
use crate::space::{DesignSpace, ParameterSpec, Setting};

/// Partition threshold used for both reference spaces.
pub const REFERENCE_THRESHOLD: u64 = 150;

fn param(name: &str, values: &[i64]) -> ParameterSpec {
    ParameterSpec::new(name, values.iter().map(|&v| Setting::from(v)))
}

/// 1152 configurations of small embedded cores.
pub fn low_power_space() -> DesignSpace {
    DesignSpace::new(vec![
        param(CORES, &[1, 2, 4]),
        param(FREQUENCY, &[75, 100, 125, 150]),
        param(L1_I, &[8, 16, 32, 64]),
        param(L1_D, &[8, 16, 32, 64]),
        param(L2, &[256, 512, 1024]),
        param(L3, &[2048, 4096]),
    ])
    .expect("bundled space is valid")
}

/// 2700 configurations of GHz-class host cores.
pub fn high_performance_space() -> DesignSpace {
    DesignSpace::new(vec![
        param(CORES, &[2, 4, 8]),
        param(FREQUENCY, &[1700, 2200, 2800, 3200]),
        param(L1_I, &[8, 16, 32, 64, 128]),
        param(L1_D, &[8, 16, 32, 64, 128]),
        param(L2, &[256, 512, 1024]),
        param(L3, &[2048, 4096, 8192]),
    ])
    .expect("bundled space is valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpacePreset {
    LowPower,
    HighPerformance,
}

impl SpacePreset {
    pub const ALL: [SpacePreset; 2] = [SpacePreset::LowPower, SpacePreset::HighPerformance];

    pub fn as_str(&self) -> &'static str {
        match self {
            SpacePreset::LowPower => "low-power",
            SpacePreset::HighPerformance => "high-performance",
        }
    }

    pub fn space(&self) -> DesignSpace {
        match self {
            SpacePreset::LowPower => low_power_space(),
            SpacePreset::HighPerformance => high_performance_space(),
        }
    }

    pub fn weights(&self) -> Weights {
        match self {
            SpacePreset::LowPower => Weights::low_power(),
            SpacePreset::HighPerformance => Weights::high_performance(),
        }
    }

    pub fn power_model(&self) -> PowerModelParams {
        match self {
            SpacePreset::LowPower => PowerModelParams::LOW_POWER,
            SpacePreset::HighPerformance => PowerModelParams::HIGH_PERFORMANCE,
        }
    }

    /// Stand-in benchmarks for the space, named after the workloads usually
    /// run on that class of core.
    pub fn benchmarks(&self) -> Vec<BenchmarkId> {
        match self {
            SpacePreset::LowPower => vec![
                BenchmarkId::new("cholesky", Category::DataSensingAggregation),
                BenchmarkId::new("radix", Category::DataSensingAggregation),
            ],
            SpacePreset::HighPerformance => vec![
                BenchmarkId::new("blackscholes", Category::DataAnalysisMining),
                BenchmarkId::new("freqmine", Category::DataAnalysisMining),
                BenchmarkId::new("facesim", Category::Graphics),
                BenchmarkId::new("fluidanimate", Category::Graphics),
                BenchmarkId::new("fft", Category::SignalProcessingCommunication),
            ],
        }
    }
}

impl fmt::Display for SpacePreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SpacePreset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SpacePreset::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| format!("unknown space preset `{s}` (expected low-power or high-performance)"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_cardinalities() {
        assert_eq!(low_power_space().cardinality(), 1152);
        assert_eq!(high_performance_space().cardinality(), 2700);
    }

    #[test]
    fn preset_names_round_trip() {
        for p in SpacePreset::ALL {
            assert_eq!(p.as_str().parse::<SpacePreset>().unwrap(), p);
        }
        assert!("medium".parse::<SpacePreset>().is_err());
    }

    #[test]
    fn every_category_but_uncategorized_is_represented() {
        let mut seen: Vec<Category> = SpacePreset::ALL
            .iter()
            .flat_map(|p| p.benchmarks())
            .map(|b| b.category)
            .collect();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 4);
        assert!(!seen.contains(&Category::Uncategorized));
    }
}
