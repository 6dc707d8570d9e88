use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed arguments: bad dimensions, out-of-range ranks, non-finite entries.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The sampling pair does not capture the column or row space of the base point.
    #[error("sampling is not admissible: {0}")]
    Inadmissible(String),

    /// A local-theory hypothesis (perturbation size relative to a spectral gap) fails.
    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),

    /// The requested construction would divide by zero.
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// No admissible test problem was found within the retry budget.
    #[error("could not build an admissible test problem (seeds tried: {seeds:?})")]
    Construction { seeds: Vec<u64> },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error on {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
