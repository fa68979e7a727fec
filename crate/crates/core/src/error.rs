use thiserror::Error;

use crate::solver::SolveReport;

/// Errors raised by the numerical engine.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation (non-finite
    /// coordinates, non-positive dilation factor, unbounded field, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A parameter or configuration value violates its contract.
    #[error("invalid `{field}`: {message}")]
    Config { field: String, message: String },

    /// Iterative solve failed (divergence or non-finite iterate).
    #[error("numerical failure: {message}")]
    Numerical {
        message: String,
        report: Option<Box<SolveReport>>,
    },

    /// A search terminated without meeting its target.
    #[error("search exhausted: {0}")]
    SearchExhausted(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
