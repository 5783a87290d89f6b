use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// An index or value beyond the completeness horizon of a spectrum.
    #[error("horizon error: {0}")]
    Horizon(String),
    /// Malformed input text.
    #[error("parse error{}: {message}", if .location.is_empty() { String::new() } else { format!(" at {}", .location) })]
    Parse { location: String, message: String },
    /// Well-formed input violating a data invariant.
    #[error("validation error: {0}")]
    Validation(String),
    /// A polynomial with negative leading coefficient has no positivity threshold.
    #[error("no positivity threshold: leading coefficient is not positive")]
    NoThreshold,
    /// The cancellation system could not be solved; carries the residual D-coefficients.
    #[error("cancellation system unsolvable, residual D-coefficients {residuals:?}")]
    Unsolvable { residuals: Vec<String> },
}

pub type Result<T> = std::result::Result<T, Error>;
