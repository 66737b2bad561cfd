//! Experiment harness: config files, runs, sweeps, metrics, and output.

pub mod config;
pub mod corpus;
pub mod experiment;
pub mod invariants;
pub mod metrics;
pub mod output;
pub mod sweep;

pub use config::{ExperimentConfig, GridSpec, TargetRule};
pub use experiment::{run_seed, Experiment, RunOutcome};
pub use metrics::{exact_match, token_accuracy, MetricsRecord, RunRow};
pub use sweep::{expand_grid, sweep, SweepPoint};
