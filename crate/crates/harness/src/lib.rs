//! Experiment harness for the switching social-learning protocol: JSON
//! configs, parallel Monte Carlo replicas, a `tau = 1` baseline and CSV
//! export. The `switchlearn` binary wraps it.

pub mod config;
pub mod error;
pub mod experiment;
pub mod export;

pub use config::{ExperimentConfig, Scenario};
pub use error::{HarnessError, Result};
pub use experiment::{compare_baseline, run_experiment, validate, Comparison, ReplicaResult, RunReport};
