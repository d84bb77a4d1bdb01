//! Experiment runner for the `bigjump` command.

pub mod config;
pub mod error;
pub mod report;
pub mod runner;

pub use config::{ExperimentConfig, OutputFormat, Scenario};
pub use error::{CliError, Result};
pub use report::{emit_report, ExperimentReport};
pub use runner::run_experiment;

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "BIGJUMP_OUTPUT_DIR";
