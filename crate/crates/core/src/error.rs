//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid piecewise-linear data: {0}")]
    InvalidPiecewiseLinear(String),

    #[error("branch Hamiltonian is not coercive: left tail slope {left}, right tail slope {right}")]
    NotCoercive { left: f64, right: f64 },

    #[error("invalid interval [{a}, {b}]: lower end exceeds upper end")]
    InvalidInterval { a: f64, b: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("junction function is not semi-coercive (fixed point escapes to -inf on branch {branch}); apply semi_coercify first")]
    NotSemiCoercive { branch: usize },

    #[error("junction function is not super-relaxed: level crossing at height {level} diverges on branch {branch}")]
    NotSuperRelaxed { branch: usize, level: f64 },

    #[error("monotonicity violated: {0}")]
    MonotonicityViolation(String),

    #[error("composition orders of the relaxation disagree at p = {p:?}: {first} vs {second}")]
    CommutationMismatch { p: Vec<f64>, first: f64, second: f64 },

    #[error("limiter tensor construction failed: {0}")]
    LimiterTensor(String),

    #[error("point {p:?} could not be located in any extrema cell")]
    CellLocation { p: Vec<f64> },

    #[error("CFL violation on branch {branch}: gradient range [{min}, {max}] left the working range [{lo}, {hi}]")]
    CflViolation { branch: usize, min: f64, max: f64, lo: f64, hi: f64 },

    #[error("solver tolerance breach: {check} measured {measured}, allowed {allowed}")]
    ToleranceBreach { check: String, measured: f64, allowed: f64 },

    #[error("scenario error: {0}")]
    Scenario(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
