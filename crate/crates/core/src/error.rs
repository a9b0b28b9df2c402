use std::fmt;

use thiserror::Error;

/// One violated configuration rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub field: &'static str,
    pub rule: String,
}

impl ConfigError {
    pub fn new(field: &'static str, rule: impl Into<String>) -> Self {
        ConfigError { field, rule: rule.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.rule)
    }
}

impl std::error::Error for ConfigError {}

/// Every rule a configuration violated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        write!(f, "invalid configuration: {}", parts.join("; "))
    }
}

impl std::error::Error for ConfigErrors {}

impl From<ConfigError> for ConfigErrors {
    fn from(e: ConfigError) -> Self {
        ConfigErrors(vec![e])
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericalError {
    #[error("domain error in {function}: {detail}")]
    Domain { function: &'static str, detail: String },
    #[error("quadrature did not converge: estimate {partial:e} with error bound {error_bound:e} after {subdivisions} subdivisions")]
    NonConvergence { partial: f64, error_bound: f64, subdivisions: usize },
    #[error("non-finite integrand value at x = {at:e}")]
    NonFinite { at: f64 },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigErrors),
    #[error(transparent)]
    Numerical(#[from] NumericalError),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl From<ConfigError> for Error {
    fn from(e: ConfigError) -> Self {
        Error::Config(e.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
