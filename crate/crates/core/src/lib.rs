//! Primal-dual exponentially weighted learners for online decision making
//! with a long-term stochastic constraint.
//!
//! The learner picks a distribution `p_t` over `K` actions each round, sees a
//! reward vector `r_t` (or only the played coordinate, in the bandit setting)
//! and a noisy realization `c_t` of an unknown constraint vector `c`, and
//! must keep the cumulative regret against the best fixed distribution with
//! `p^T c >= c0` sublinear while the long-run shortfall
//! `[sum_t (c0 - p_t^T c)]_+` also grows sublinearly.
//!
//! The crate is `no_std` and only needs `alloc`. Everything that touches the
//! filesystem or the command line lives in the `clewa` companion crate.
//!
//! Modules:
//! - [`distribution`]: simplex distributions, log-domain weights, sampling.
//! - [`types`]: dual variable, parameters, feedback and per-round records.
//! - [`learner`]: EWA, LEWA, high-probability LEWA, Exp3, bandit LEWA and its
//!   high-probability variant, plus an explore-then-exploit foil.
//! - [`environment`]: oblivious reward processes and the Bernoulli constraint model.
//! - [`oracle`]: the exact constrained best-fixed comparator.
//! - [`metrics`]: regret, violation, variation and growth-exponent fits.
//! - [`play`]: the decide / sample / update loop over a trace.
//! - [`rng`]: seed derivation and per-purpose random streams.
#![no_std]

extern crate alloc;

pub mod distribution;
pub mod environment;
mod error;
pub mod learner;
pub mod metrics;
pub mod oracle;
pub mod play;
pub mod rng;
pub mod types;

pub use distribution::{normalize, sample, ActionDistribution, LogWeightVector, SIMPLEX_TOLERANCE};
pub use environment::{generate, ConstraintModel, EnvironmentTrace, RewardProcess};
pub use error::{Error, Result};
pub use learner::{make_learner, DualRegularizer, ImportanceEstimate, Learner, LearnerKind, ParamOverrides};
pub use metrics::{fit_exponent, realized_regret, regret, variation, violation};
pub use oracle::{best_fixed, best_fixed_grid, h_curve, ComparatorSolution};
pub use play::{play, Playthrough};
pub use types::{DualVariable, LearnerParams, RoundFeedback, RoundRecord};
