//! Flow-based reputation engine with absolute reputation values.
//!
//! Ratings aggregate into an evidence matrix A whose entries live on an
//! absolute `[0, 1]` scale (1 very good, 1/2 neutral, 0 very bad), and the
//! reputation vector solves the implicit equation
//!
//! ```text
//! r = (1 - α)·s + α·A·r / (eᵀr)
//! ```
//!
//! where `s` is the central authority's direct-evidence start vector and
//! `α` weighs indirect against direct evidence. The solution exists, is
//! unique, and stays in `[0, 1]ⁿ`; unlike Markov-chain metrics, which
//! normalize away everything but a ranking, the values are comparable
//! across populations and over time.
//!
//! Module map:
//!
//! - [`evidence`] — rating ingestion, aggregation into A, irreducibility check;
//! - [`solver`] — iterative and direct solvers, spectral analysis, the
//!   α-endpoint closed forms, the alternative metric, the diagonal-shift law;
//! - [`sensitivity`] — first-order response `∂r/∂A` and attack-channel ranking;
//! - [`baseline`] — EigenTrust-style Markov metric for comparison;
//! - [`simlab`] — instance generator, threat models, experiment sweeps.

pub mod baseline;
pub mod error;
pub mod evidence;
pub mod matrix;
pub mod sensitivity;
pub mod simlab;
pub mod solver;

pub use error::{Error, Result};
pub use evidence::{aggregate, check_irreducible, RatingEvent, TransactionLog, UserId};
pub use matrix::EvidenceMatrix;
pub use solver::{
    solve, solve_alpha1, solve_direct, solve_iterative, ReputationResult, SolveMethod,
    SolverConfig, SpectralInfo, StartVector,
};
