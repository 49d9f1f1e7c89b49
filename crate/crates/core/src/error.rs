use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Caller-supplied data violates a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A bump cube around `center` is not properly aligned with the partition.
    #[error("alignment violated at center #{index} ({center:?}): {reason}")]
    Alignment {
        index: usize,
        center: Vec<f64>,
        reason: String,
    },

    /// A network or predictor could not be assembled from the given parts.
    #[error("construction failed: {0}")]
    Construction(String),

    #[error("malformed document: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for errors caused by the caller's data rather than the environment.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_) | Error::Alignment { .. } | Error::Construction(_) | Error::Format(_)
        )
    }
}
