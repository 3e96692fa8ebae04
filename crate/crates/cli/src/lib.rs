//! Config-driven experiment runner for `dirac-core`: JSON configs in, JSON
//! reports and CSV tables out.

pub mod config;
pub mod run;

pub use config::{Experiment, ExperimentConfig, UsageError, OUT_DIR_ENV};
pub use run::{run_experiment, version, Check, Report, RunOutcome};
