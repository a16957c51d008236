use std::path::PathBuf;

/// Errors surfaced by corpus ingestion, binary formats, and model plumbing.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: malformed line, expected at least 2 tab-separated columns")]
    MalformedLine { path: PathBuf, line: usize },
    #[error("{path}: bad magic, expected {expected:?}")]
    BadMagic { path: PathBuf, expected: &'static str },
    #[error("{path}: unsupported version {found}")]
    BadVersion { path: PathBuf, found: u32 },
    #[error("{path}: truncated payload ({context})")]
    Truncated { path: PathBuf, context: String },
    #[error("{path}: row count {found} does not match expected {expected}")]
    RowCountMismatch {
        path: PathBuf,
        found: usize,
        expected: usize,
    },
    #[error("{path}: non-finite value at row {row}, col {col}")]
    NonFinite { path: PathBuf, row: usize, col: usize },
    #[error("{path}: unknown item key {key:?} in feature index")]
    UnknownKey { path: PathBuf, key: String },
    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },
    #[error("user {user} interacts with every item; cannot sample a negative")]
    DegenerateUser { user: u32 },
    #[error("modality count mismatch: {graphs} graphs vs {weights} fusion weights")]
    ModalityMismatch { graphs: usize, weights: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
