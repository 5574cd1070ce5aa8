use alloc::string::String;

/// Errors raised while constructing models or running protocol steps.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("state space needs at least 2 states, got {0}")]
    TooFewStates(usize),

    #[error("duplicate state label `{0}`")]
    DuplicateLabel(String),

    #[error("index {index} out of range for {what} of size {len}")]
    OutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("distribution does not sum to 1 (sum = {sum}) for {context}")]
    NotNormalized { context: String, sum: f64 },

    #[error("non-positive or non-finite probability {value} for {context}")]
    InvalidProbability { context: String, value: f64 },

    #[error("signal {signal} not in alphabet of agent {agent} (size {size})")]
    UnknownSignal { agent: usize, signal: usize, size: usize },

    #[error("invalid weight matrix: {0}")]
    InvalidWeights(String),

    #[error("graph is not connected")]
    Disconnected,

    #[error("threshold must satisfy 0 < tau <= 1, got {0}")]
    InvalidThreshold(f64),

    #[error("value {0} must lie strictly inside (0, 1)")]
    OutsideUnitInterval(f64),

    #[error("likelihood ratio must be finite and positive, got {0}")]
    InvalidRatio(f64),

    #[error("KL divergence undefined: q[{index}] = 0 where p[{index}] = {p} > 0")]
    KlUndefined { index: usize, p: f64 },

    #[error("invalid window [{start}, {end}] for trajectory of {rounds} rounds")]
    InvalidWindow { start: usize, end: usize, rounds: usize },

    #[error("empty sequence")]
    Empty,
}

pub type Result<T> = core::result::Result<T, Error>;
