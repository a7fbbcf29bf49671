use std::io;

/// Errors from the verification suite, file formats and CLI.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Rejected by the sampling or analytic core.
    #[error(transparent)]
    Core(#[from] conwalk_core::Error),
    /// Bad arguments or configuration.
    #[error("{0}")]
    Usage(String),
    /// Reading or writing a file.
    #[error("io error: {0}")]
    Io(#[from] io::Error),
    /// Malformed JSON.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    /// Malformed CSV.
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

/// Result alias for this crate.
pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}
