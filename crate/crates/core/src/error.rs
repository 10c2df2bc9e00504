use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("script table line {line}: {message}")]
    TableParse { line: usize, message: String },

    #[error("script table invariant violated: {0}")]
    TableInvariant(String),

    #[error("line {line}: input contains the reserved token [MASK]")]
    ReservedToken { line: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parallel inputs differ in length ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },

    #[error("malformed {what} at line {line}: {message}")]
    Format {
        what: &'static str,
        line: usize,
        message: String,
    },

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
