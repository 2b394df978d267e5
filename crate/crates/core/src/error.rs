use thiserror::Error;

/// Errors raised by the numerical kernels and the analysis drivers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error(
        "admissibility violated: mean nutrient {mean} must exceed the apoptosis threshold sigma_tilde {sigma_tilde}"
    )]
    Admissibility { mean: f64, sigma_tilde: f64 },

    #[error("convergence failure: {0}")]
    Convergence(String),

    #[error("mode {n} is not decaying: log multiplier {log_multiplier:e} >= 0 (mu is at or above the threshold)")]
    Stability { n: usize, log_multiplier: f64 },

    #[error("quadrature grid too small: {0}")]
    GridTooSmall(String),

    #[error("singular linear system: {0}")]
    SingularMatrix(String),

    #[error("no convergence after {iterations} iterations (last residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("trajectory left the positive half-line at t = {t} (R = {radius})")]
    NonPositiveRadius { t: f64, radius: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_positive(field: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            field,
            reason: format!("must be a finite positive number, got {value}"),
        })
    }
}
