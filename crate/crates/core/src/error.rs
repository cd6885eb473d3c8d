use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A malformed input file. `location` is a line, row or JSON path.
    #[error("{file}: {location}: {message}")]
    Parse {
        file: String,
        location: String,
        message: String,
    },

    #[error("invalid schema: {0}")]
    Schema(String),

    #[error("unknown node `{0}`")]
    UnknownNode(String),

    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),

    #[error("{0}")]
    InvalidArgument(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("model error: {0}")]
    Model(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(file: impl Into<String>, location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            file: file.into(),
            location: location.into(),
            message: message.into(),
        }
    }

    /// Short machine-readable category, used by the CLI error report.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Parse { .. } | Error::Json(_) | Error::Csv(_) => "parse",
            Error::Schema(_) => "schema",
            Error::UnknownNode(_) | Error::UnknownAttribute(_) => "lookup",
            Error::InvalidArgument(_) => "argument",
            Error::InsufficientData(_) => "data",
            Error::Model(_) => "model",
        }
    }
}
