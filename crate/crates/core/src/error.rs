use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid basis: {0}")]
    InvalidBasis(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("numeric error at step {step}: {message}")]
    NumericAtStep { step: usize, message: String },

    #[error("singular restriction: smallest singular value {0:e} below 1e-300")]
    SingularRestriction(f64),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("infeasible derivative profile: {0}")]
    InfeasibleProfile(String),

    #[error("invalid parameter {name}: {message}")]
    Parameter { name: &'static str, message: String },

    #[error("resolution error: {0}")]
    Resolution(String),

    #[error("declaration error at column {column}: {message}")]
    Declaration { column: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(name: &'static str, message: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            message: message.into(),
        }
    }
}
