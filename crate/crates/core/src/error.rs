use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid schema: {0}")]
    Schema(String),

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("invalid stream: {0}")]
    Stream(String),

    #[error("row {row}: unknown value '{value}' for attribute '{attribute}'")]
    UnknownValue {
        attribute: String,
        value: String,
        row: usize,
    },

    #[error("row {row}: {message}")]
    Record { row: usize, message: String },

    #[error("invalid syndrome: {0}")]
    Syndrome(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("insufficient history: {0}")]
    InsufficientHistory(String),

    #[error("anomaly backend '{backend}': {message}")]
    Backend { backend: String, message: String },

    #[error("slot {slot}: {source}")]
    AtSlot {
        slot: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("generator: {0}")]
    Generator(String),

    #[error("outbreak: {0}")]
    Outbreak(String),

    #[error("evaluation: {0}")]
    Evaluation(String),

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.into(),
            source,
        }
    }
}
