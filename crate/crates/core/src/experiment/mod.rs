//! Experiment configuration, orchestration and file output.

mod config;
mod manifest;
mod runner;

pub use config::{ExperimentConfig, Format, MeasureKind, Subcommand};
pub use manifest::manifest;
pub use runner::{execute, run_experiment, ExperimentOutput, RunOutcome};
