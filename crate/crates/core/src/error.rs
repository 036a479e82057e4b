use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input file could not be opened or read.
    #[error("cannot read {path}: {source}")]
    Input {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A row of an input file could not be parsed. `line` is 1-based and
    /// counts the header.
    #[error("{file}, line {line}: {message}")]
    Parse {
        file: String,
        line: u64,
        message: String,
    },

    /// The header row of an input file does not match the expected schema.
    #[error("{file}: expected header `{expected}`, found `{found}`")]
    Schema {
        file: String,
        expected: String,
        found: String,
    },

    #[error("validation failed: {0}")]
    Validation(String),

    /// The caller asked for something the inputs cannot provide (a missing
    /// model, an empty posterior, a mismatched direction).
    #[error("usage error: {0}")]
    Usage(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn input(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Input {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad input or invocation rather than a
    /// runtime failure.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::Schema { .. }
                | Error::Validation(_)
                | Error::Usage(_)
                | Error::Input { .. }
                | Error::Json(_)
        )
    }
}
