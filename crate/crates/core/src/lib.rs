//! Switching Bayesian/non-Bayesian social learning over a network.
//!
//! Agents hold beliefs over a finite set of states and observe private
//! signals each round. An agent whose signal is informative (its Bayes
//! posterior moves at least `tau` in total variation) updates on its own;
//! otherwise it averages accumulated log-likelihoods with its neighbors
//! using the network weights. This crate holds the model types, the update
//! rules, the switching matrices, the round loop and the diagnostics. It is
//! `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

pub mod analysis;
pub mod error;
pub mod learning;
pub mod linalg;
pub mod model;
pub mod protocol;
pub mod signals;
pub mod switching;

pub use analysis::{identifiability_report, IdentifiabilityReport};
pub use error::{Error, Result};
pub use learning::{InformativenessVerdict, Threshold};
pub use linalg::Matrix;
pub use model::{
    validate_assumptions, Assumption, BeliefState, LikelihoodModel, Network, Prior, StateSpace, ValidationReport,
};
pub use protocol::{run_round, simulate, RecordOptions, RoundOutcome, Trajectory};
pub use signals::{generate_signals, SignalSource, SignalTable};
pub use switching::{build_switching_matrix, CommEvent, CommLedger, SwitchingMatrix};
