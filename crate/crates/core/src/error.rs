use thiserror::Error;

/// Errors produced by the estimation library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the requested operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A computation produced a non-finite value or failed to converge.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// A non-finite negative log-likelihood contribution at a specific row.
    #[error("non-finite likelihood at row {row}: {detail}")]
    NonFiniteRow { row: usize, detail: String },

    /// Array or parameter shapes disagree.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Training diverged; `last_good_epoch` is the last epoch with a finite loss (0 if none).
    #[error("training diverged at epoch {epoch} (last good epoch {last_good_epoch})")]
    Training {
        epoch: usize,
        last_good_epoch: usize,
    },

    /// Malformed user input (CSV contents, column names, configuration).
    #[error("invalid input: {0}")]
    Input(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for errors that originate from bad input rather than from the numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Domain(_) | Error::Shape(_) | Error::Input(_) | Error::Csv(_) | Error::Json(_)
        )
    }
}
