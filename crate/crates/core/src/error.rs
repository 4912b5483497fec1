use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("size error: {0}")]
    Size(String),
    #[error("index error: {0}")]
    Index(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("argument error: {0}")]
    Argument(String),
    #[error("state error: {0}")]
    State(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("training diverged at step {step}: {msg}")]
    Divergence { step: usize, msg: String },
    #[error("kernel entry ({row}, {col}) failed: {source}")]
    KernelEntry {
        row: usize,
        col: usize,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("serialization error: {0}")]
    Serde(String),
}

pub type Result<T> = std::result::Result<T, Error>;

