//! The decide / sample / update loop over a fixed trace.

use alloc::vec::Vec;

use rand::RngCore;

use crate::distribution::sample;
use crate::environment::EnvironmentTrace;
use crate::error::{Error, Result};
use crate::learner::Learner;
use crate::types::{RoundFeedback, RoundRecord};

/// Slack on the exploration floor check.
pub const FLOOR_TOLERANCE: f64 = 1e-12;

/// Records of one run plus the invariant extremes observed along the way.
#[derive(Debug, Clone)]
pub struct Playthrough {
    pub records: Vec<RoundRecord>,
    /// Largest `lambda` seen, including the final post-update value.
    pub max_lambda: f64,
    /// The learner's analytic cap on `lambda`.
    pub lambda_cap: f64,
    /// Smallest entry of any played distribution.
    pub min_prob: f64,
    /// `gamma / K` for bandit learners, zero otherwise.
    pub exploration_floor: f64,
}

/// Runs `learner` over every round of `trace`, drawing actions from `rng`.
///
/// Fails with [`Error::Internal`] if the dual cap or the exploration floor is
/// ever breached.
pub fn play<R: RngCore + ?Sized>(learner: &mut Learner, trace: &EnvironmentTrace, rng: &mut R) -> Result<Playthrough> {
    if trace.num_actions() != learner.num_actions() {
        return Err(Error::DimensionMismatch { expected: learner.num_actions(), actual: trace.num_actions() });
    }
    let lambda_cap = learner.dual_cap();
    let floor = learner.exploration_floor();
    let bandit = learner.kind().is_bandit();
    let mut out = Playthrough {
        records: Vec::with_capacity(trace.horizon()),
        max_lambda: learner.lambda().value(),
        lambda_cap,
        min_prob: f64::INFINITY,
        exploration_floor: floor,
    };

    for (t, (reward, constraint)) in trace.rewards().zip(trace.constraints()).enumerate() {
        let dist = learner.decide();
        let min_prob = dist.min_prob();
        if min_prob < floor - FLOOR_TOLERANCE {
            return Err(Error::Internal(alloc::format!("round {t}: min probability {min_prob} below floor {floor}")));
        }
        out.min_prob = out.min_prob.min(min_prob);
        let action = sample(&dist, rng);
        let lambda_before = learner.lambda().value();

        let feedback = if bandit {
            RoundFeedback::Bandit { action, reward: reward[action], constraint: constraint[action] }
        } else {
            RoundFeedback::FullInfo { reward, constraint }
        };
        learner.update(&feedback)?;

        let lambda = learner.lambda().value();
        if lambda > lambda_cap && learner.kind().is_constrained() {
            return Err(Error::Internal(alloc::format!("round {t}: lambda {lambda} above cap {lambda_cap}")));
        }
        out.max_lambda = out.max_lambda.max(lambda);
        out.records.push(RoundRecord {
            t,
            distribution: dist,
            sampled_action: Some(action),
            lambda_before,
            realized_reward: reward[action],
            realized_constraint: constraint[action],
        });
    }
    Ok(out)
}
