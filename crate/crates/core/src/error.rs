use thiserror::Error;

use crate::variational::EigenPair;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{operation} is not supported on {domain}")]
    UnsupportedDomain { operation: &'static str, domain: &'static str },

    #[error("curvature undefined: {0} has no smooth boundary curvature")]
    CurvatureUndefined(&'static str),

    #[error("bracket failure: boundary mismatch has no sign change for lambda in [{low}, {high}]")]
    BracketFailure { low: f64, high: f64 },

    #[error("zero denominator: the discrete L^p norm of the field vanishes")]
    ZeroDenominator,

    #[error("field is attached to a different grid")]
    GridMismatch,

    #[error("field must be strictly positive (found {value} at point {index})")]
    NonPositiveField { index: usize, value: f64 },

    #[error("barrier constraint violated: gamma = {gamma} must be below eps/(2R) = {limit}")]
    BarrierConstraint { gamma: f64, limit: f64 },

    #[error("minimizer did not converge after {iterations} iterations (gradient norm {gradient_norm:e})")]
    NotConverged { iterations: usize, gradient_norm: f64, best: Box<EigenPair> },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
