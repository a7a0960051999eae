use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("ingestion error at row {row}, column '{column}': {message}")]
    Ingest {
        row: usize,
        column: String,
        message: String,
    },

    #[error("no rows left after dropping rows with missing values")]
    EmptyData,

    #[error("index {index} out of range for {len} rows")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("exhaustive categorical search refused: {0} occupied categories (limit 20)")]
    TooManyCategories(usize),

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("model format error: {0}")]
    Format(String),

    #[error("unsupported model format version {found} (expected {expected})")]
    Version { expected: u32, found: u32 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
