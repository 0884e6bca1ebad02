//! Crate-wide error type.
//!
//! Every fallible public operation returns `Result<T, Error>`. Precondition
//! violations are reported as `Usage`, numeric bad luck that the caller can
//! retry (a denominator vanishing at a sample point) gets its own variant, and
//! loops with doubling schedules fail hard with `MaxIterationsExceeded`
//! instead of looping forever.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Caller broke a documented precondition (mixed fields, unknown
    /// variable, malformed input, ...).
    #[error("usage error: {0}")]
    Usage(String),

    /// Parse failure with 1-based line and column.
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    /// A denominator vanished at a sample point; the caller may resample.
    #[error("denominator vanished at sample point: {0}")]
    DenominatorVanished(String),

    /// A doubling/retry loop hit its configured cap.
    #[error("maximum iterations exceeded in {0}")]
    MaxIterationsExceeded(String),

    /// Wall-clock budget exhausted.
    #[error("time budget exceeded during {0}")]
    BudgetExceeded(String),

    /// An internal invariant failed. Always a bug, never user error.
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub fn internal(msg: impl Into<String>) -> Self {
        Error::Internal(msg.into())
    }
}
