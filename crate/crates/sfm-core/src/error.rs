//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by estimation, test statistics, and the resampling harness.
#[derive(Debug, Clone, Error)]
pub enum SfmError {
    /// A parameter or configuration value violates its domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The design matrix is rank deficient (or too small for the estimator).
    #[error("rank-deficient or undersized design: {0}")]
    RankDeficient(String),

    /// COLS cannot match a sample whose third residual moment is non-negative:
    /// the gamma component requires negative skew.
    #[error("wrong-skew sample: third residual moment {m3} is non-negative")]
    WrongSkew { m3: f64 },

    /// An intermediate quantity exceeded the representable floating range.
    #[error("overflow in {context}: exponent {exponent:.1}")]
    Overflow { context: &'static str, exponent: f64 },

    /// Adaptive quadrature failed to reach the requested tolerance.
    #[error("quadrature did not converge: {0}")]
    QuadratureFailure(String),

    /// An iterative solver exhausted its budget.
    #[error("solver did not converge: {0}")]
    NoConvergence(String),

    /// Too many resampling replicates failed estimation.
    #[error("resampling aborted: {failures} replicate failures exceed 20% of M={m}")]
    TooManyFailures { failures: usize, m: usize },

    /// A residual fell outside the support of the inverted density grid.
    #[error("residual {value} outside density grid span [{lo}, {hi}]")]
    OutsideGrid { value: f64, lo: f64, hi: f64 },
}

pub type SfmResult<T> = Result<T, SfmError>;
