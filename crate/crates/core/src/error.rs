//! Error type shared by the numerical modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CoreError>;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("coefficient not elliptic at x = {location:?}: quadratic form = {value}")]
    NonElliptic { location: Vec<f64>, value: f64 },

    #[error("invalid fractional order s = {0}: must lie strictly in (0, 1)")]
    InvalidOrder(f64),

    #[error("eigendecomposition failed: {0}")]
    EigenFailure(String),

    #[error("linear solve failed: {0}")]
    SolveFailure(String),

    #[error("quadrature did not reach tolerance {tol:e}: estimated error {err:e} at {context}")]
    QuadratureTolerance { tol: f64, err: f64, context: String },

    #[error("radius {r} not admissible: {reason}")]
    BadRadius { r: f64, reason: String },

    #[error("field is trivial (identically zero); frequency quantities undefined")]
    TrivialField,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed data: {0}")]
    Parse(String),
}
