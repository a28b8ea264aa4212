use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: line {line}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("unknown column `{0}`")]
    UnknownColumn(String),

    #[error("column `{0}` has zero variance on the training rows")]
    ZeroVariance(String),

    #[error("calendar mismatch in {source_name}: missing {} date(s): {}", .missing.len(), .missing.join(", "))]
    Alignment {
        source_name: String,
        missing: Vec<String>,
    },

    #[error("out of range: {0}")]
    Range(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("protocol error at response line {line}: {message}")]
    Protocol { line: usize, message: String },

    #[error("no response for request id `{0}`")]
    Correlation(String),

    #[error("capacity: {0}")]
    Capacity(String),

    #[error("rank deficient: {0}")]
    Rank(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("model spec: {0}")]
    Spec(String),

    #[error("schema mismatch: {0}")]
    Schema(String),

    #[error("class `{0}` absent from gold labels")]
    UndefinedClass(String),

    #[error("cannot stratify: {0}")]
    Fold(String),

    #[error("division by zero: {0}")]
    Division(String),

    #[error("configuration invalid:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error("stage `{stage}` requires artifacts from stage `{requires}`, which were not found")]
    Dependency { stage: String, requires: String },

    #[error("runs are not comparable: {0}")]
    Comparison(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization: {0}")]
    Serialization(String),
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Validation(_) | Error::Format { .. } => 2,
            Error::Dependency { .. } => 3,
            _ => 4,
        }
    }
}
