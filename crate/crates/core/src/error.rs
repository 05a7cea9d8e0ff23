use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("{what} index {index} out of range (valid: {lo}..={hi})")]
    IndexOutOfRange { what: &'static str, index: usize, lo: usize, hi: usize },

    #[error("hidden unit {0} has an all-zero weight column")]
    DegenerateColumn(usize),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("explicit Fisher matrix refused for m = {m} (cap {cap}); use the matrix-free inner products")]
    ExplicitModeRefused { m: usize, cap: usize },

    #[error("basis Gram matrix is rank deficient (condition estimate {condition:e})")]
    RankDeficient { condition: f64 },

    #[error("cannot fit a decay rate: {0}")]
    Unfittable(String),

    #[error("integrand returned a non-finite value at u = {0}")]
    NonFiniteIntegrand(f64),

    #[error("invalid configuration for `{field}`: {reason}")]
    InvalidConfig { field: String, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_index(what: &'static str, index: usize, lo: usize, hi: usize) -> Result<()> {
    if index < lo || index > hi {
        Err(Error::IndexOutOfRange { what, index, lo, hi })
    } else {
        Ok(())
    }
}
