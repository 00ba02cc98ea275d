//! Crate-wide error type.

use crate::types::{EnvironmentClass, ScenarioId};

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by model construction, generation, analysis, and I/O.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// No preset is registered for the requested combination.
    #[error("no preset for env={env}, scenario={scenario}, v={v_mph} mph")]
    PresetNotFound {
        env: EnvironmentClass,
        scenario: ScenarioId,
        v_mph: u32,
    },

    /// An input violated a type invariant or parameter range.
    #[error("invalid input: {0}")]
    Validation(String),

    /// An input was structurally valid but carries no usable information
    /// (zero energy, empty ensemble, ...).
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// A regression problem has no unique solution.
    #[error("rank-deficient fit: {0}")]
    RankDeficient(String),

    /// Not enough data to estimate the requested quantity.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// A file could not be parsed; positions are 1-based.
    #[error("parse error at line {line}, column {column}: {msg}")]
    Parse {
        line: usize,
        column: usize,
        msg: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::DegenerateInput(msg.into())
    }
}
