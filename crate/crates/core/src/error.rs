use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input did not match the expected file schema (missing field, wrong type).
    #[error("schema error: {0}")]
    Schema(String),

    /// Input parsed but violates a domain invariant.
    #[error("validation error: {0}")]
    Validation(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("could not place {requested} objects after {attempts} attempts (placed {placed})")]
    Placement {
        requested: usize,
        placed: usize,
        attempts: usize,
    },

    #[error("direction is degenerate: projected norm {0:e} is below tolerance")]
    DegenerateDirection(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("caption {0} has no token embeddings")]
    EmptyCaption(u32),

    #[error("invalid k: {0}")]
    InvalidK(String),

    #[error("unknown object id {0}")]
    UnknownId(u32),

    #[error("no caption for object id {0}")]
    MissingCaption(u32),

    #[error("provider error: {0}")]
    Provider(#[from] ProviderError),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("length mismatch: {preds} predictions vs {gts} references")]
    LengthMismatch { preds: usize, gts: usize },

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("config error: {0}")]
    Config(String),
}

/// Failures raised by remote or pluggable providers.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum ProviderError {
    #[error("request timed out after {0} ms")]
    Timeout(u64),
    #[error("malformed response: {0}")]
    Malformed(String),
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("service returned status {status}: {body}")]
    Status { status: u16, body: String },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 3,
            Error::Provider(_) => 4,
            _ => 2,
        }
    }
}
