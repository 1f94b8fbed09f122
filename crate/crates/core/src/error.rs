use thiserror::Error;

use crate::runner::SolverTrace;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// An argument left the open positive orthant (or another function domain).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("division by zero at ({row}, {col})")]
    DivisionByZero { row: usize, col: usize },

    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error(
        "relative-error denominator {0:e} is degenerate (every row of X is constant?); \
         report the raw objective instead"
    )]
    DegenerateDenominator(f64),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("data generation failed: {0}")]
    Generation(String),

    #[error("solver diverged at iteration {iteration}: {reason}")]
    Divergence {
        iteration: usize,
        reason: String,
        trace: Box<SolverTrace>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// True for errors caused by the caller's configuration rather than the
    /// numerical state (the CLI maps these to exit code 2).
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Unsupported(_))
    }
}
