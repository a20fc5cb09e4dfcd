use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error in `{field}`: {message}")]
    Parse { field: String, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("group element kind does not match the group ({expected} expected, got {got})")]
    KindMismatch { expected: String, got: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("representation invalid: residual {residual:.3e} at pair ({left}, {right})")]
    RepresentationInvalid {
        residual: f64,
        left: String,
        right: String,
    },

    #[error("isotypic decomposition failed: {0}")]
    DecompositionFailed(String),

    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("state has no weight on any isotypic block")]
    EmptyState,

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("displacement {0} outside the validity region |alpha| <= {1}")]
    Range(f64, f64),

    #[error("truncation error: {0}")]
    Truncation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
