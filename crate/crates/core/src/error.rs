use thiserror::Error;

/// Errors raised by the decoding engine and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid sequence length {0}: must be at least 1")]
    InvalidLength(usize),

    #[error("vocabulary size {0} is too small: need at least 2 real tokens")]
    InvalidVocabulary(usize),

    #[error("token id {id} is outside the vocabulary (size {size}, mask id {size})")]
    OutOfVocabulary { id: u32, size: usize },

    #[error("non-finite value {value} at index {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("shape mismatch: expected {expected}, got {actual}")]
    Shape { expected: String, actual: String },

    #[error("model not fitted: {0}")]
    ModelNotFitted(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unknown {family} strategy `{name}` (registered: {known})")]
    UnknownStrategy {
        family: &'static str,
        name: String,
        known: String,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn shape(expected: impl ToString, actual: impl ToString) -> Self {
        Error::Shape {
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

/// Range check for probability-like parameters.
pub(crate) fn check_unit(name: &'static str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::param(name, format!("{value} is outside [0, 1]")));
    }
    Ok(())
}
