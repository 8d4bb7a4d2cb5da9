use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("element index {index} out of range for ground set of size {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("scenario must have at least one agent and one locality")]
    EmptyScenario,

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("probability {value} for {what} is outside [0, 1]")]
    InvalidProbability { what: String, value: f64 },

    #[error("invalid correction function: {0}")]
    InvalidCorrection(String),

    #[error("group of {size} exceeds the exact-evaluation cutoff of {cutoff}")]
    OversizeGroup { size: usize, cutoff: usize },

    #[error("epsilon {0} must lie in [0, 1)")]
    InvalidEpsilon(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matching is infeasible: {0}")]
    InfeasibleMatching(String),

    #[error("oracle failed: {0}")]
    Oracle(String),

    #[error("invalid experiment spec: {0}")]
    InvalidSpec(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed JSON in {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("CSV error on {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
