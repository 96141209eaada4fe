use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Too few observations for the requested statistic.
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    /// Cholesky factorization hit a non-positive pivot.
    #[error("matrix is not positive definite (pivot {pivot:e} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("estimation failed: {0}")]
    EstimationFailed(String),

    /// Malformed input file. `line` is 1-based when known.
    #[error("format error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Format { line: Option<usize>, message: String },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn format_at(line: usize, message: impl Into<String>) -> Self {
        Error::Format { line: Some(line), message: message.into() }
    }

    pub(crate) fn format(message: impl Into<String>) -> Self {
        Error::Format { line: None, message: message.into() }
    }

    /// True for failures that come from the data rather than from the caller.
    pub fn is_estimation(&self) -> bool {
        matches!(
            self,
            Error::DegenerateSample(_) | Error::NotPositiveDefinite { .. } | Error::EstimationFailed(_)
        )
    }
}
