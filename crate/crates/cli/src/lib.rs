//! Config-driven runner for the samplers in `involutive-core`.
//!
//! A run reads one JSON config, builds the target and kernel, runs
//! `n_chains` seeded chains in parallel and writes `chain_{c}.csv` plus
//! `summary.json` into the output directory.

pub mod catalog;
pub mod config;
pub mod runner;

pub use config::{ConfigError, ExperimentConfig, LoadedConfig};
pub use runner::{prepare, run, Experiment, Overrides, RunError, RunSummary};

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const CONFIG: u8 = 1;
    pub const RUNTIME: u8 = 2;
}
