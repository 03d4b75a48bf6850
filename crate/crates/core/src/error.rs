use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpreadError {
    #[error("operator is not Hermitian: entry ({row}, {col}) deviates by {deviation:.3e}")]
    NotHermitian { row: usize, col: usize, deviation: f64 },

    #[error("state is not normalized: squared norm {0:.15}")]
    NotNormalized(f64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("eigensolver did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("degenerate spectrum: smallest gap {gap:.3e} is below {tolerance:.3e}")]
    DegenerateSpectrum { gap: f64, tolerance: f64 },

    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error("quadrature did not reach tolerance, estimated error {estimate:.3e}")]
    Quadrature { estimate: f64 },

    #[error("unknown {kind} `{name}` (available: {available})")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        available: String,
    },

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl SpreadError {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        SpreadError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors caused by unreadable or unparsable input files.
    pub fn is_malformed_input(&self) -> bool {
        matches!(
            self,
            SpreadError::Json(_) | SpreadError::Io(_) | SpreadError::Malformed(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, SpreadError>;
