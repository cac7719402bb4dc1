//! Experiment orchestration: configuration, the subcommands and their files.
//!
//! All files are written from the calling thread; only the Monte Carlo
//! inside `simulate` runs on worker threads.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{cmd_bounds, cmd_gamma, cmd_report, cmd_simulate, RunContext};
pub use config::ExperimentConfig;
