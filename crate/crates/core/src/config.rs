//! The run-configuration document.
//!
//! A JSON object with these keys (unknown keys are rejected everywhere):
//!
//! ```json
//! {
//!   "design_space": [{"name": "Cores", "settings": [1, 2, 4]}, ...],
//!   "weights": {"power": 0.9, "time": 0.1},
//!   "threshold": 150,
//!   "benchmarks": [{"name": "radix", "category": "data-sensing-aggregation"}],
//!   "evaluator": {"cost_model": {"power": "low-power"}},
//!   "oracle": false,
//!   "output_dir": "out",
//!   "seed": 42,
//!   "oracle_budget": 1000000
//! }
//! ```
//!
//! `design_space`, `weights`, `threshold`, `benchmarks` and `evaluator` are
//! required. `category` defaults to `uncategorized`, `oracle` to false,
//! `seed` to [`DEFAULT_SEED`] and `oracle_budget` to
//! [`DEFAULT_ORACLE_BUDGET`](crate::analysis::DEFAULT_ORACLE_BUDGET).
//!
//! The evaluator is either
//! `{"cost_model": {"power": <preset>, "workloads": {<benchmark>: <profile>}}}`
//! where `<preset>` is `"low-power"`, `"high-performance"` or
//! `{"custom": {"cap_per_core": .., "leak_per_core": .., "leak_per_kb_cache": .., "idle_floor": ..}}`
//! and `workloads` optionally pins a profile per benchmark (others are drawn
//! from the seed), or
//! `{"external": {"command": "sim --cores {param:Cores} --bench {benchmark}", "result_file": "out/{benchmark}.txt", "timeout_secs": 60}}`.

use std::collections::{BTreeMap, HashSet};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::analysis::DEFAULT_ORACLE_BUDGET;
use crate::cost_model::{CostModelError, PowerModelParams, WorkloadProfile, MODEL_PARAMETERS};
use crate::evaluator::{BenchmarkId, Category};
use crate::explorer::{ExplorationThreshold, ZeroThreshold};
use crate::external::{check_template, AdapterSpec, TemplateError};
use crate::metrics::{MetricsError, Weights};
use crate::space::{DesignSpace, ParameterSpec, SpaceError};

/// Seed used when neither the command line, `ARCHEX_SEED` nor the document
/// provide one.
pub const DEFAULT_SEED: u64 = 42;

/// Environment variable that overrides the document's seed.
pub const SEED_ENV: &str = "ARCHEX_SEED";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error(transparent)]
    Validation(#[from] ValidationError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("missing required field `{0}`")]
    MissingField(&'static str),
    #[error("design_space: {0}")]
    Space(#[from] SpaceError),
    #[error("weights: {0}")]
    Weights(#[from] MetricsError),
    #[error("threshold: {0}")]
    Threshold(#[from] ZeroThreshold),
    #[error("benchmarks: list is empty")]
    NoBenchmarks,
    #[error("benchmarks: duplicate name `{0}`")]
    DuplicateBenchmark(String),
    #[error("benchmarks: name `{0}` must be non-empty and use only letters, digits, `-`, `_` or `.`")]
    BadBenchmarkName(String),
    #[error("evaluator: {0}")]
    CostModel(#[from] CostModelError),
    #[error("evaluator: the cost model needs a `{0}` parameter in the design space")]
    MissingModelParameter(&'static str),
    #[error("evaluator: workload given for unlisted benchmark `{0}`")]
    UnlistedWorkload(String),
    #[error("evaluator: {0}")]
    Template(#[from] TemplateError),
    #[error("evaluator: timeout_secs must be a positive number")]
    BadTimeout,
    #[error("oracle_budget must be at least 1")]
    ZeroBudget,
    #[error("seed `{0}` is not an unsigned 64-bit integer")]
    BadSeed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PowerPreset {
    LowPower,
    HighPerformance,
    Custom(PowerModelParams),
}

impl PowerPreset {
    pub fn params(&self) -> PowerModelParams {
        match self {
            PowerPreset::LowPower => PowerModelParams::LOW_POWER,
            PowerPreset::HighPerformance => PowerModelParams::HIGH_PERFORMANCE,
            PowerPreset::Custom(p) => *p,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostModelSpec {
    pub power: PowerPreset,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub workloads: BTreeMap<String, WorkloadProfile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvaluatorSpec {
    CostModel(CostModelSpec),
    External(AdapterSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkEntry {
    pub name: String,
    #[serde(default = "default_category")]
    pub category: Category,
}

fn default_category() -> Category {
    Category::Uncategorized
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightsDoc {
    power: f64,
    time: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    design_space: Option<Vec<ParameterSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<WeightsDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    threshold: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    benchmarks: Option<Vec<BenchmarkEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    evaluator: Option<EvaluatorSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    oracle: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    oracle_budget: Option<u64>,
}

/// A validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub design_space: DesignSpace,
    pub weights: Weights,
    pub threshold: ExplorationThreshold,
    pub benchmarks: Vec<BenchmarkId>,
    pub evaluator: EvaluatorSpec,
    pub oracle: bool,
    pub output_dir: Option<PathBuf>,
    pub seed: u64,
    pub oracle_budget: u64,
}

fn valid_benchmark_name(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
        && name != "."
        && name != ".."
}

impl RunConfig {
    /// Parses and validates a JSON document, reporting the first problem.
    pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        let doc: Document = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        Ok(RunConfig::from_document(doc)?)
    }

    fn from_document(doc: Document) -> Result<RunConfig, ValidationError> {
        use ValidationError::MissingField;
        let design_space = DesignSpace::new(doc.design_space.ok_or(MissingField("design_space"))?)?;
        let w = doc.weights.ok_or(MissingField("weights"))?;
        let weights = Weights::new(w.power, w.time)?;
        let threshold = ExplorationThreshold::new(doc.threshold.ok_or(MissingField("threshold"))?)?;

        let entries = doc.benchmarks.ok_or(MissingField("benchmarks"))?;
        if entries.is_empty() {
            return Err(ValidationError::NoBenchmarks);
        }
        let mut seen = HashSet::new();
        for e in &entries {
            if !valid_benchmark_name(&e.name) {
                return Err(ValidationError::BadBenchmarkName(e.name.clone()));
            }
            if !seen.insert(e.name.as_str()) {
                return Err(ValidationError::DuplicateBenchmark(e.name.clone()));
            }
        }

        let evaluator = doc.evaluator.ok_or(MissingField("evaluator"))?;
        match &evaluator {
            EvaluatorSpec::CostModel(spec) => {
                spec.power.params().validate()?;
                for name in MODEL_PARAMETERS {
                    if design_space.index_of(name).is_none() {
                        return Err(ValidationError::MissingModelParameter(name));
                    }
                }
                for (bench, profile) in &spec.workloads {
                    if !seen.contains(bench.as_str()) {
                        return Err(ValidationError::UnlistedWorkload(bench.clone()));
                    }
                    profile.validate()?;
                }
            }
            EvaluatorSpec::External(spec) => {
                check_template(&spec.command, &design_space)?;
                check_template(&spec.result_file, &design_space)?;
                if let Some(t) = spec.timeout_secs {
                    if !(t.is_finite() && t > 0.0) {
                        return Err(ValidationError::BadTimeout);
                    }
                }
            }
        }

        let oracle_budget = doc.oracle_budget.unwrap_or(DEFAULT_ORACLE_BUDGET as u64);
        if oracle_budget == 0 {
            return Err(ValidationError::ZeroBudget);
        }

        Ok(RunConfig {
            design_space,
            weights,
            threshold,
            benchmarks: entries
                .into_iter()
                .map(|e| BenchmarkId::new(e.name, e.category))
                .collect(),
            evaluator,
            oracle: doc.oracle.unwrap_or(false),
            output_dir: doc.output_dir,
            seed: doc.seed.unwrap_or(DEFAULT_SEED),
            oracle_budget,
        })
    }

    fn to_document(&self) -> Document {
        Document {
            design_space: Some(self.design_space.parameters().to_vec()),
            weights: Some(WeightsDoc {
                power: self.weights.power(),
                time: self.weights.time(),
            }),
            threshold: Some(self.threshold.get()),
            benchmarks: Some(
                self.benchmarks
                    .iter()
                    .map(|b| BenchmarkEntry {
                        name: b.name.clone(),
                        category: b.category,
                    })
                    .collect(),
            ),
            evaluator: Some(self.evaluator.clone()),
            oracle: Some(self.oracle),
            output_dir: self.output_dir.clone(),
            seed: Some(self.seed),
            oracle_budget: Some(self.oracle_budget),
        }
    }

    /// Serializes every field explicitly, so defaults survive a round trip.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("document is always serializable")
    }

    /// SHA-256 of the compact canonical document. The output directory is
    /// left out: it says where results go, not what they are.
    pub fn hash(&self) -> String {
        let mut doc = self.to_document();
        doc.output_dir = None;
        let canonical = serde_json::to_vec(&doc).expect("document is always serializable");
        hex::encode(Sha256::digest(canonical))
    }
}

/// Applies the seed precedence: command line, then `ARCHEX_SEED`, then the
/// document (which already carries [`DEFAULT_SEED`] when it has no seed).
pub fn resolve_seed(cli: Option<u64>, env: Option<&str>, document: u64) -> Result<u64, ValidationError> {
    if let Some(s) = cli {
        return Ok(s);
    }
    match env.map(str::trim) {
        Some(raw) if !raw.is_empty() => raw.parse().map_err(|_| ValidationError::BadSeed(raw.to_string())),
        _ => Ok(document),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::low_power_space;

    const LOW_POWER_DOC: &str = r#"{
        "design_space": [
            {"name": "Cores", "settings": [1, 2, 4]},
            {"name": "Frequency", "settings": [75, 100, 125, 150]},
            {"name": "L1-I", "settings": [8, 16, 32, 64]},
            {"name": "L1-D", "settings": [8, 16, 32, 64]},
            {"name": "L2", "settings": [256, 512, 1024]},
            {"name": "L3", "settings": [2048, 4096]}
        ],
        "weights": {"power": 0.9, "time": 0.1},
        "threshold": 150,
        "benchmarks": [
            {"name": "cholesky", "category": "data-sensing-aggregation"},
            {"name": "radix", "category": "data-sensing-aggregation"}
        ],
        "evaluator": {"cost_model": {"power": "low-power"}}
    }"#;

    fn with(key: &str, value: serde_json::Value) -> String {
        let mut doc: serde_json::Value = serde_json::from_str(LOW_POWER_DOC).unwrap();
        doc[key] = value;
        doc.to_string()
    }

    fn without(key: &str) -> String {
        let mut doc: serde_json::Value = serde_json::from_str(LOW_POWER_DOC).unwrap();
        doc.as_object_mut().unwrap().remove(key);
        doc.to_string()
    }

    fn validation(text: &str) -> ValidationError {
        match RunConfig::parse(text) {
            Err(ConfigError::Validation(v)) => v,
            other => panic!("expected a validation error, got {other:?}"),
        }
    }

    #[test]
    fn reference_low_power_document() {
        let cfg = RunConfig::parse(LOW_POWER_DOC).unwrap();
        assert_eq!(cfg.design_space, low_power_space());
        assert_eq!(cfg.design_space.cardinality(), 1152);
        assert_eq!(cfg.weights, Weights::new(0.9, 0.1).unwrap());
        assert_eq!(cfg.threshold.get(), 150);
        assert_eq!(cfg.seed, DEFAULT_SEED);
        assert!(!cfg.oracle);
        assert_eq!(cfg.oracle_budget, 1_000_000);
    }

    #[test]
    fn weights_must_sum_to_one() {
        let v = validation(&with("weights", serde_json::json!({"power": 0.6, "time": 0.6})));
        assert!(matches!(v, ValidationError::Weights(MetricsError::WeightsDoNotSumToOne { .. })));
    }

    #[test]
    fn missing_fields_are_named() {
        for key in ["design_space", "weights", "threshold", "benchmarks", "evaluator"] {
            assert_eq!(validation(&without(key)), ValidationError::MissingField(key));
        }
        assert!(validation(&without("threshold")).to_string().contains("threshold"));
    }

    #[test]
    fn unknown_keys_are_rejected_with_location() {
        let text = LOW_POWER_DOC.replacen("\"threshold\"", "\"treshold\"", 1);
        match RunConfig::parse(&text) {
            Err(ConfigError::Parse { line, message, .. }) => {
                assert_eq!(line, 11);
                assert!(message.contains("treshold"));
            }
            other => panic!("{other:?}"),
        }
        let nested = with("weights", serde_json::json!({"power": 0.5, "time": 0.5, "area": 0.0}));
        assert!(matches!(RunConfig::parse(&nested), Err(ConfigError::Parse { .. })));
        let evaluator = with("evaluator", serde_json::json!({"cost_model": {"power": "low-power", "noise": 1}}));
        assert!(matches!(RunConfig::parse(&evaluator), Err(ConfigError::Parse { .. })));
    }

    #[test]
    fn malformed_json_reports_position() {
        match RunConfig::parse("{\n  \"threshold\": ,\n}") {
            Err(ConfigError::Parse { line, column, .. }) => assert_eq!((line, column), (2, 16)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn component_errors_are_wrapped() {
        assert_eq!(
            validation(&with("threshold", 0.into())),
            ValidationError::Threshold(ZeroThreshold)
        );
        let bad_space = serde_json::json!([{"name": "Cores", "settings": [2, 1]}]);
        assert!(matches!(
            validation(&with("design_space", bad_space)),
            ValidationError::Space(SpaceError::NonAscendingSettings { .. })
        ));
        assert_eq!(validation(&with("benchmarks", serde_json::json!([]))), ValidationError::NoBenchmarks);
        let dup = serde_json::json!([{"name": "a"}, {"name": "a"}]);
        assert_eq!(
            validation(&with("benchmarks", dup)),
            ValidationError::DuplicateBenchmark("a".into())
        );
        let slash = serde_json::json!([{"name": "../etc"}]);
        assert!(matches!(
            validation(&with("benchmarks", slash)),
            ValidationError::BadBenchmarkName(_)
        ));
        let partial = serde_json::json!([{"name": "Cores", "settings": [1, 2]}]);
        assert_eq!(
            validation(&with("design_space", partial)),
            ValidationError::MissingModelParameter("Frequency")
        );
        let template = serde_json::json!({"external": {"command": "sim {param:Voltage}", "result_file": "r.txt"}});
        assert!(matches!(
            validation(&with("evaluator", template)),
            ValidationError::Template(TemplateError::UnknownParameter(_))
        ));
    }

    #[test]
    fn round_trip_preserves_everything() {
        let mut cfg = RunConfig::parse(LOW_POWER_DOC).unwrap();
        assert_eq!(RunConfig::parse(&cfg.to_json()).unwrap(), cfg);

        cfg.oracle = true;
        cfg.seed = 7;
        cfg.output_dir = Some("results".into());
        cfg.evaluator = EvaluatorSpec::External(AdapterSpec {
            command: "sim --cores {param:Cores} --bench {benchmark}".into(),
            result_file: "/tmp/{benchmark}.txt".into(),
            timeout_secs: Some(2.5),
        });
        assert_eq!(RunConfig::parse(&cfg.to_json()).unwrap(), cfg);

        cfg.evaluator = EvaluatorSpec::CostModel(CostModelSpec {
            power: PowerPreset::Custom(PowerModelParams::HIGH_PERFORMANCE),
            workloads: [(
                "radix".to_string(),
                crate::cost_model::generate_workload(3, Category::DataSensingAggregation),
            )]
            .into(),
        });
        assert_eq!(RunConfig::parse(&cfg.to_json()).unwrap(), cfg);
    }

    #[test]
    fn decimal_settings_round_trip() {
        let space = serde_json::json!([
            {"name": "Cores", "settings": [1, 2]},
            {"name": "Frequency", "settings": [0.1, 0.3, 1.25]},
            {"name": "L1-I", "settings": [8]},
            {"name": "L1-D", "settings": [8]},
            {"name": "L2", "settings": [256]},
            {"name": "L3", "settings": [2048]}
        ]);
        let cfg = RunConfig::parse(&with("design_space", space)).unwrap();
        let again = RunConfig::parse(&cfg.to_json()).unwrap();
        assert_eq!(again, cfg);
        assert!(cfg.to_json().contains("0.3"));
    }

    #[test]
    fn hash_ignores_output_dir_but_not_content() {
        let a = RunConfig::parse(LOW_POWER_DOC).unwrap();
        let mut b = a.clone();
        b.output_dir = Some("elsewhere".into());
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
        let mut c = a.clone();
        c.threshold = ExplorationThreshold::new(151).unwrap();
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn seed_precedence() {
        assert_eq!(resolve_seed(Some(1), Some("2"), 3), Ok(1));
        assert_eq!(resolve_seed(None, Some("2"), 3), Ok(2));
        assert_eq!(resolve_seed(None, Some(" "), 3), Ok(3));
        assert_eq!(resolve_seed(None, None, 3), Ok(3));
        assert!(matches!(resolve_seed(None, Some("-5"), 3), Err(ValidationError::BadSeed(_))));
    }
}
