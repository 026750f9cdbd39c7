//! Design space exploration for processor microarchitecture configurations.
//!
//! The search balances total power against execution time with a weighted
//! sum of normalized metrics and runs in four phases per benchmark:
//!
//! 1. one-shot probes rank parameters by significance and pick a starting
//!    setting for each ([`explorer::phase1_one_shot`]);
//! 2. the most significant parameters, up to a threshold on partial space
//!    size, are set aside for exhaustive search and the next half of the
//!    rest for greedy search ([`explorer::phase2_partition`]);
//! 3. the exhaustive set is searched completely ([`explorer::phase3_exhaustive`]);
//! 4. the greedy set is swept one parameter at a time with early stopping
//!    ([`explorer::phase4_greedy`]).
//!
//! Evaluations go through the [`evaluator::Evaluator`] trait. The crate ships
//! an analytic [`cost_model`] and an [`external`] process adapter; the
//! [`analysis`] module provides a full-exhaustive oracle and Pareto tools to
//! judge the search.

pub mod analysis;
pub mod cli;
pub mod config;

pub mod cost_model;
pub mod evaluator;
pub mod explorer;
pub mod external;
pub mod metrics;
pub mod presets;
pub mod report;
pub mod run;



pub mod space;
