use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid topology: {0}")]
    InvalidTopology(String),

    #[error("dimension mismatch: expected {expected} oscillators, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("coupling topology is disconnected; algebraic connectivity is not informative")]
    Disconnected,

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal mass {residual:e})")]
    EigenNoConvergence { sweeps: usize, residual: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error(
        "no harmonic balance solution after {iterations} iterations (residuals {residuals:?})"
    )]
    NoBalanceSolution {
        iterations: usize,
        residuals: [f64; 2],
    },

    #[error("not oscillatory: {0}")]
    NotOscillatory(String),

    #[error("integration diverged at t = {time}")]
    Diverged { time: f64 },

    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
