//! End-to-end experiments: configuration, the reconstruction pipeline,
//! report files and the `rggrecon` command line.

pub mod cli;
pub mod config;
pub mod experiment;
pub mod output;
pub mod pipeline;

pub use config::{ConfigError, ExperimentConfig, Resolved, SCHEMA_VERSION};
pub use experiment::{run_experiment, ExperimentError, ExperimentSummary};
pub use pipeline::{Evaluation, PipelineError, PipelineLayout, Reconstruction, RunSummary};
