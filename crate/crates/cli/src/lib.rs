//! Experiment driver: configuration, output tables and the command
//! implementations behind the `isac` binary.

pub mod commands;
pub mod config;
pub mod validate;

pub use commands::{
    cmd_constellation, cmd_pareto, cmd_tradeoff, run_constellation, run_pareto, run_tradeoff,
    Link, SummaryRow, SUMMARY_COLUMNS,
};
pub use config::{ConstellationSource, ExperimentConfig, McSizes, OutputFormat};
pub use validate::{cmd_validate, Check, Report};
