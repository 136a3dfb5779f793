use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid array configuration: {0}")]
    InvalidArray(String),

    #[error("invalid polar point: {0}")]
    InvalidPoint(String),

    #[error("antenna index {index} outside the array (|n| <= {max})")]
    AntennaIndex { index: i64, max: i64 },

    #[error("activation interval {interval} does not divide N-1 = {n_minus_one}")]
    IndivisibleActivation { interval: usize, n_minus_one: usize },

    #[error("invalid channel parameters: {0}")]
    InvalidChannel(String),

    #[error("codebook construction failed: {0}")]
    Codebook(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("degenerate beam pattern: {0}")]
    DegeneratePattern(String),

    #[error("rank-deficient effective channel for user {user}: colliding with users {colliding:?}")]
    RankDeficient { user: usize, colliding: Vec<usize> },

    #[error("no feasible activation interval: {0}")]
    Infeasible(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cannot write output: {0}")]
    Output(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
