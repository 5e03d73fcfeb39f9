use thiserror::Error;

#[derive(Debug, Error)]
pub enum KbinError {
    #[error(transparent)]
    Core(#[from] kbin_core::Error),
    #[error("row {row}, column {col}: {msg}")]
    Parse { row: usize, col: usize, msg: String },
    #[error("{0}")]
    Format(String),
    #[error("demand series has no rows")]
    EmptySeries,
    #[error("{0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, KbinError>;
