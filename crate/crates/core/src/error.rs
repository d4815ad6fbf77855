use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised anywhere in the fusion stack.
///
/// The variants are grouped into three families (configuration, data and
/// numeric) which map onto the command-line exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument vector: {0}")]
    InvalidArguments(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("corrupt model: {0}")]
    CorruptModel(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("empty input file {0}")]
    EmptyFile(PathBuf),

    #[error("non-numeric cell at row {row}, column '{column}': '{value}'")]
    NonNumeric {
        row: usize,
        column: String,
        value: String,
    },

    #[error("non-finite value at row {row}, column '{column}'")]
    NonFinite { row: usize, column: String },

    #[error("label out of domain at row {row}: '{value}' (expected 0 or 1)")]
    LabelDomain { row: usize, value: String },

    #[error("degenerate labels: {0}")]
    DegenerateLabels(String),

    #[error("stratification error: {0}")]
    Stratification(String),

    #[error("data leakage: {0}")]
    Leakage(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 2 configuration, 3 data/schema, 4 numeric.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Io { .. } | Error::Json(_) => 2,
            Error::Dimension { .. }
            | Error::InvalidArguments(_)
            | Error::Data(_)
            | Error::Schema(_)
            | Error::EmptyFile(_)
            | Error::NonNumeric { .. }
            | Error::NonFinite { .. }
            | Error::LabelDomain { .. }
            | Error::DegenerateLabels(_)
            | Error::Stratification(_)
            | Error::Csv(_) => 3,
            Error::CorruptModel(_) | Error::Leakage(_) | Error::Numeric(_) => 4,
        }
    }
}
