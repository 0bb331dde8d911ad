//! Preset experiments, custom pipelines and their reports for the `framelab` binary.

pub mod config;
pub mod pipeline;
pub mod report;

pub use config::{ConfigError, ExperimentConfig, PRESETS};
pub use pipeline::{run_pipeline, run_preset, RunError};
pub use report::{Check, Op, VerdictReport};
