use thiserror::Error;

/// Errors raised by kernel construction, integration and diagnostics.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("trajectory diverged (non-finite state) after {steps} steps")]
    Divergence { steps: usize },

    #[error("fixed-point iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("auxiliary sampler failed: {0}")]
    Sampler(String),

    #[error("not enough data: need at least {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
