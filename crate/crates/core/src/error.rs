//! Error type shared across the solver crates.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite input component")]
    NonFiniteInput,

    #[error("non-finite value at grid index ({ix}, {iy}, {iz})")]
    NonFiniteField { ix: usize, iy: usize, iz: usize },

    #[error("grid mismatch: {expected:?} vs {got:?}")]
    GridMismatch { expected: (usize, usize), got: (usize, usize) },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("solution blew up at t = {time}")]
    BlowUp { time: f64 },

    #[error("calming bound violated at t = {time}: max |zeta(u)| = {measured} > {bound}")]
    CalmingBoundViolated { time: f64, measured: f64, bound: f64 },

    #[error("config error at line {line}, key `{key}`: {message}")]
    Config { line: usize, key: String, message: String },

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("trajectory records have mismatched sampling")]
    MismatchedSampling,

    #[error("trajectory record does not retain states")]
    MissingStates,

    #[error("absorbing-ball statistics require constant-in-time forcing")]
    NonConstantForcing,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
