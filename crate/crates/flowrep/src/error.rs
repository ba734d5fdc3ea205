//! Error type shared by all modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input failed validation (bad rating value, malformed matrix, ...).
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    /// A text input could not be parsed; `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// The iteration budget ran out before the termination criterion was met.
    /// Carries the last iterate so callers can inspect how far it got.
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        last_iterate: Vec<f64>,
    },

    /// Power iteration did not reach the requested tolerance; carries the
    /// best eigenpair estimate found.
    #[error("spectral estimation did not converge (best residual {residual:.3e})")]
    SpectralFailure {
        lambda: f64,
        residual: f64,
        v: Vec<f64>,
    },

    /// The instance falls outside the class where a solution is guaranteed
    /// (e.g. a reducible matrix whose Perron vector is orthogonal to the
    /// start vector, or f(n) > 1 signalling a broken matrix).
    #[error("instance violates solvability conditions: {0}")]
    TheoremViolation(String),

    /// The fixed-point iteration hit an undefined state (e.g. the reputation
    /// norm collapsed to zero).
    #[error("degenerate instance: {0}")]
    DegenerateInstance(String),

    /// A dense factorization or inversion failed unexpectedly.
    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
