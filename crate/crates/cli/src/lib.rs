//! Experiment runner for the inverse curvature flow laboratory.

pub mod certify;
pub mod config;
pub mod experiment;

pub use config::{parse_config, ConfigError, ExperimentConfig, InitSpec, Mode};
pub use experiment::{execute_point, restart, run_experiment, sweep, CliError, PointResult};
