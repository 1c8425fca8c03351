use thiserror::Error;

/// Errors raised by the optics, protocol, adversary and stats layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum QsaError {
    #[error("invalid mode count {0}: must be at least 1")]
    InvalidDimension(usize),

    #[error("dimension mismatch: expected {expected} modes, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("field is not normalized (squared norm {norm_sq})")]
    NotNormalized { norm_sq: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("no separation between true-key mean {mu_true} and attack mean {mu_attack}")]
    NoSeparation { mu_true: f64, mu_attack: f64 },

    #[error("challenge-response database is empty")]
    EmptyDatabase,

    #[error("malformed database: {0}")]
    Format(String),
}

impl QsaError {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        QsaError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, QsaError>;
