use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum AqecError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("code words are not orthonormal: {0}")]
    NotOrthonormal(String),

    #[error("singular matrix in linear solve")]
    Singular,

    #[error("kappa is undefined: free-evolution slope {slope:.3e} vanishes")]
    KappaUndefined { slope: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl AqecError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        AqecError::InvalidArgument(msg.into())
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            AqecError::Singular | AqecError::KappaUndefined { .. } | AqecError::NonFinite(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, AqecError>;
