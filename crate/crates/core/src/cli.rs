//! Command-line front end.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use crate::config::{resolve_seed, CostModelSpec, EvaluatorSpec, PowerPreset, RunConfig, DEFAULT_SEED, SEED_ENV};
use crate::explorer::ExplorationThreshold;
use crate::presets::{SpacePreset, REFERENCE_THRESHOLD};
use crate::report::{compare_reports, render_comparison, render_summary, rounded_comparison, ExplorationReport};
use crate::run::{run_explore, run_oracle, Artifacts, RunOptions};

/// Default output directory when neither `--out` nor the document set one.
pub const DEFAULT_OUTPUT_DIR: &str = "archex-out";

#[derive(Debug, Parser)]
#[command(name = "archex", version, about = "Power/performance design space exploration for processor configurations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the four-phase search on every benchmark of a run configuration.
    Explore {
        #[command(flatten)]
        run: RunArgs,
        /// Also run the full-exhaustive oracle and report the gaps.
        #[arg(long)]
        oracle: bool,
    },
    /// Evaluate every configuration of the space for every benchmark.
    Oracle {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Compare a search report against an oracle report.
    Compare {
        #[arg(long)]
        method: PathBuf,
        #[arg(long)]
        oracle: PathBuf,
        /// Print the statistics as JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Explore a bundled reference space with its stand-in benchmarks.
    Demo {
        #[arg(long, value_parser = parse_space_preset)]
        space: SpacePreset,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Write artifacts here; otherwise only the summary is printed.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Skip the oracle comparison.
        #[arg(long)]
        no_oracle: bool,
        /// Print the bundled run configuration and exit.
        #[arg(long)]
        print_config: bool,
    },
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Run configuration document (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Benchmarks (and oracle evaluations) processed concurrently.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides ARCHEX_SEED and the document's seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

fn parse_space_preset(s: &str) -> Result<SpacePreset, String> {
    s.parse()
}

/// The run configuration behind `demo --space <preset>`.
pub fn demo_config(preset: SpacePreset) -> RunConfig {
    RunConfig {
        design_space: preset.space(),
        weights: preset.weights(),
        threshold: ExplorationThreshold::new(REFERENCE_THRESHOLD).expect("threshold is positive"),
        benchmarks: preset.benchmarks(),
        evaluator: EvaluatorSpec::CostModel(CostModelSpec {
            power: match preset {
                SpacePreset::LowPower => PowerPreset::LowPower,
                SpacePreset::HighPerformance => PowerPreset::HighPerformance,
            },
            workloads: Default::default(),
        }),
        oracle: true,
        output_dir: None,
        seed: DEFAULT_SEED,
        oracle_budget: crate::analysis::DEFAULT_ORACLE_BUDGET as u64,
    }
}

fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    RunConfig::parse(&text).with_context(|| format!("invalid run configuration {}", path.display()))
}

fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

fn seed_from_env(cli: Option<u64>, document: u64) -> Result<u64> {
    let env = std::env::var(SEED_ENV).ok();
    Ok(resolve_seed(cli, env.as_deref(), document)?)
}

fn finish(artifacts: &Artifacts, config: &RunConfig, out: Option<&Path>) -> Result<ExitCode> {
    if let Some(dir) = out {
        artifacts
            .write(dir, config)
            .with_context(|| format!("cannot write results to {}", dir.display()))?;
    }
    print!("{}", render_summary(&artifacts.report));
    Ok(if artifacts.failed() {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    })
}

fn output_dir(flag: Option<PathBuf>, config: &RunConfig) -> PathBuf {
    flag.or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
}

pub fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Explore { run, oracle } => {
            let config = load_config(&run.config)?;
            let opts = RunOptions {
                seed: seed_from_env(run.seed, config.seed)?,
                jobs: run.jobs.max(1),
                oracle: oracle || config.oracle,
                timestamp: timestamp(),
            };
            let artifacts = run_explore(&config, &opts)?;
            let out = output_dir(run.out, &config);
            finish(&artifacts, &config, Some(&out))
        }
        Command::Oracle { run } => {
            let config = load_config(&run.config)?;
            let opts = RunOptions {
                seed: seed_from_env(run.seed, config.seed)?,
                jobs: run.jobs.max(1),
                oracle: true,
                timestamp: timestamp(),
            };
            let artifacts = run_oracle(&config, &opts)?;
            let out = output_dir(run.out, &config);
            finish(&artifacts, &config, Some(&out))
        }
        Command::Compare { method, oracle, json } => {
            let read = |p: &Path| -> Result<ExplorationReport> {
                let text = fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?;
                ExplorationReport::from_json(&text).with_context(|| format!("invalid report {}", p.display()))
            };
            let rows = compare_reports(&read(&method)?, &read(&oracle)?);
            if rows.is_empty() {
                bail!("method report lists no benchmarks");
            }
            if json {
                let value: Vec<serde_json::Value> = rows
                    .iter()
                    .map(|(name, r)| match r {
                        Ok(stats) => serde_json::json!({"benchmark": name, "comparison": rounded_comparison(stats)}),
                        Err(e) => serde_json::json!({"benchmark": name, "error": e.to_string()}),
                    })
                    .collect();
                println!("{}", serde_json::to_string_pretty(&value)?);
            } else {
                print!("{}", render_comparison(&rows));
            }
            Ok(if rows.iter().all(|(_, r)| r.is_ok()) {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::Demo {
            space,
            jobs,
            out,
            seed,
            no_oracle,
            print_config,
        } => {
            let mut config = demo_config(space);
            config.oracle = !no_oracle;
            if print_config {
                println!("{}", config.to_json());
                return Ok(ExitCode::SUCCESS);
            }
            let opts = RunOptions {
                seed: seed_from_env(seed, config.seed)?,
                jobs: jobs.max(1),
                oracle: config.oracle,
                timestamp: timestamp(),
            };
            let artifacts = run_explore(&config, &opts)?;
            finish(&artifacts, &config, out.as_deref())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn demo_configs_are_valid_documents() {
        for preset in SpacePreset::ALL {
            let cfg = demo_config(preset);
            assert_eq!(RunConfig::parse(&cfg.to_json()).unwrap(), cfg);
        }
    }

    #[test]
    fn cli_parses_documented_forms() {
        let cli = Cli::try_parse_from(["archex", "explore", "--config", "c.json", "--jobs", "4", "--oracle"]).unwrap();
        assert!(matches!(cli.command, Command::Explore { oracle: true, .. }));
        let cli = Cli::try_parse_from(["archex", "demo", "--space", "high-performance"]).unwrap();
        assert!(matches!(
            cli.command,
            Command::Demo {
                space: SpacePreset::HighPerformance,
                ..
            }
        ));
        assert!(Cli::try_parse_from(["archex", "demo", "--space", "mid"]).is_err());
        assert!(Cli::try_parse_from(["archex", "compare", "--method", "a.json"]).is_err());
    }
}
