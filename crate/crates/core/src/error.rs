use thiserror::Error;

/// Errors raised by density construction, bound computation and the oracles.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid density: {0}")]
    InvalidDensity(String),

    #[error("density integrates to {total}, expected 1 within {tolerance:e}")]
    MassMismatch { total: f64, tolerance: f64 },

    #[error("tail mass cannot be bounded: {0}")]
    UnboundedTail(String),

    #[error("bound is vacuous: {0}")]
    VacuousBound(String),

    #[error("shape hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("a tail bound is required: {0}")]
    MissingTailBound(String),

    #[error("quadrature did not converge (partial value {partial}, error estimate {error_estimate:e})")]
    QuadratureNotConverged { partial: f64, error_estimate: f64 },

    #[error("folded density never crosses 1 and is not uniform (ends at {left} and {right})")]
    NoCrossing { left: f64, right: f64 },

    #[error("sampler produced a non-finite value: {0}")]
    NonFiniteSample(f64),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn require_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(domain(format!("{name} must be positive and finite, got {v}")));
    }
    Ok(())
}
