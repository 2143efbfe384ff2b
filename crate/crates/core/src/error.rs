use thiserror::Error;

/// Errors surfaced by chamber validation and the numerical routes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeylError {
    #[error("dimension mismatch: expected {expected} coordinates, got {actual}")]
    Dimension { expected: usize, actual: usize },
    #[error("point outside the domain: {0}")]
    Domain(String),
    #[error("invalid parameter `{name}` = {value}: {constraint}")]
    Parameter { name: &'static str, value: f64, constraint: String },
    #[error("series budget: {0}")]
    Budget(String),
    #[error("inconsistent configuration: {0}")]
    Config(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("statistical insufficiency: {0}")]
    Statistical(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, WeylError>;

pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(WeylError::Parameter {
            name,
            value,
            constraint: "must be finite and > 0".into(),
        })
    }
}
