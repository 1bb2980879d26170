//! Simulation and numerical transience criteria for the nonhomogeneous frog
//! model on the integers.
//!
//! The model starts with one active frog at the origin and sleeping frogs on
//! the positive integers: site `j` holds a random number of frogs `X_j`, and
//! every frog woken at site `j` performs an independent nearest-neighbor walk
//! that steps left with probability `p_j > 1/2`. A frog landing on a site
//! wakes everything sleeping there. The model is *transient* when, with
//! probability one, only finitely many frogs ever return to the origin, and
//! *non-transient* otherwise.
//!
//! The crate has two halves that check each other:
//!
//! * [`criteria`] evaluates the sharp series conditions that decide
//!   transience (a general product series, an i.i.d. drift series governed by
//!   the constant `K = -∫ log f(1 - e^{-x}) dx`, a Poisson-count series, a
//!   log-moment dichotomy, and a subsequence-product sufficient condition),
//!   plus a heuristic partial-sum classifier.
//! * [`sim`] runs the activation process directly with reach-based Monte
//!   Carlo on reproducible random streams, so simulated survival can be
//!   compared against what the series verdicts predict.
//!
//! [`model`] declares and validates model instances and [`pgf`] supplies the
//! probability-generating-function arithmetic both halves share.

pub mod criteria;
pub mod model;
pub mod pgf;
pub mod rng;
pub mod sim;

mod quad;

use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A distribution was declared with out-of-range parameters.
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    /// A PGF was evaluated outside its domain `[0, 1]`.
    #[error("pgf argument {arg} outside [0, 1]")]
    PgfDomain { arg: f64 },
    /// A requested tolerance lies outside the supported range.
    #[error("tolerance {tol} outside supported range ({lo}, {hi})")]
    ToleranceRange { tol: f64, lo: f64, hi: f64 },
    /// Adaptive quadrature stopped making progress before reaching the
    /// requested tolerance.
    #[error("quadrature failed to converge: {0}")]
    QuadratureStalled(String),
    /// A series term evaluated to a non-finite log value.
    #[error("series term at n = {n} is not finite")]
    NonFiniteTerm { n: usize },
    /// A subsequence argument was not strictly increasing / long enough.
    #[error("invalid subsequence: {0}")]
    InvalidSubsequence(String),
    /// A simulation trial exceeded its frog budget.
    #[error("frog budget exceeded: {frogs} frogs against budget {budget}{}",
            trial.map(|t| format!(" in trial {t}")).unwrap_or_default())]
    BudgetExceeded {
        frogs: u64,
        budget: u64,
        trial: Option<u64>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
