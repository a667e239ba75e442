//! Error types shared across the crate.

use thiserror::Error;

/// Errors from renewal calculus.
#[derive(Debug, Error)]
pub enum RenewalError {
    /// The cumulative probability mass within the truncation never exceeds
    /// 1/2, so no median exists inside the computed support. Raising `t_max`
    /// helps only when the shortfall comes from truncation rather than from
    /// censored increments.
    #[error("median unreachable: cumulative mass {cumulative:.6} never exceeds 1/2")]
    TailCensored { cumulative: f64 },

    /// A query beyond the profile's truncation horizon.
    #[error("time {t} exceeds profile range n_max = {n_max}")]
    RangeExceeded { t: u64, n_max: u64 },
}

/// Errors from parsing an occupancy stream file.
#[derive(Debug, Error)]
pub enum StreamError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("line 1: malformed metadata record: {0}")]
    BadHeader(String),

    #[error("line {line}: malformed occupied time: {text:?}")]
    BadLine { line: usize, text: String },

    #[error("line {line}: occupied time {time} is not strictly increasing")]
    NonMonotone { line: usize, time: u64 },

    #[error("line {line}: occupied time {time} exceeds horizon {horizon}")]
    BeyondHorizon { line: usize, time: u64, horizon: u64 },

    #[error("line {line}: occupied time {time} must be >= 1")]
    TimeZero { line: usize, time: u64 },
}

/// Errors from the blind estimator.
#[derive(Debug, Error)]
pub enum EstimateError {
    #[error("insufficient data: found {found} quiet-interval samples, need {needed}")]
    InsufficientData { found: usize, needed: usize },

    #[error("too few usable scales: {usable} survived, need {needed}")]
    TooFewScales { usable: usize, needed: usize },

    #[error("scale {scale}: median {median} exceeds horizon {horizon}")]
    HorizonExceeded { scale: u64, median: u64, horizon: u64 },

    #[error(transparent)]
    Renewal(#[from] RenewalError),

    #[error(transparent)]
    Stream(#[from] StreamError),
}

/// Errors from simulation-side queries.
#[derive(Debug, Error)]
pub enum SimError {
    #[error("walker index {walker} out of range for k = {k}")]
    WalkerOutOfRange { walker: usize, k: usize },
}
