//! Value types shared by learners, environments and metrics.

use crate::distribution::ActionDistribution;
use crate::error::{check_unit, Error, Result};

/// Non-negative Lagrange multiplier attached to the constraint `p^T c >= c0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct DualVariable(f64);

impl DualVariable {
    pub const ZERO: Self = Self(0.0);

    pub fn new(lambda: f64) -> Result<Self> {
        if lambda.is_finite() && lambda >= 0.0 {
            Ok(Self(lambda))
        } else {
            Err(crate::error::invalid("lambda", alloc::format!("{lambda} is not a finite non-negative number")))
        }
    }

    /// Projects `x` onto the non-negative half-line.
    pub fn project(x: f64) -> Self {
        Self(if x > 0.0 { x } else { 0.0 })
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Which coefficient scales the `lambda^2` regularizer in the bandit dual step.
///
/// The bandit dual step is `lambda <- [(1 - rho * eta) lambda - eta (q^T c_hat - c0)]_+`
/// where `rho` is either `delta` (the regularizer the analysis uses) or
/// `gamma` (the form written in the bandit pseudocode).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DualRegularizer {
    #[default]
    Delta,
    Gamma,
}

/// Step sizes and problem dimensions for one learner run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearnerParams {
    /// Learning rate.
    pub eta: f64,
    /// Dual regularizer; also sets the cap `lambda <= c0 / delta`.
    pub delta: f64,
    /// Uniform exploration rate (bandit learners).
    pub gamma: f64,
    /// Confidence level (high-probability learners).
    pub epsilon: f64,
    pub horizon: usize,
    pub num_actions: usize,
    pub c0: f64,
    /// Fraction of the horizon the explore-then-exploit foil spends exploring.
    pub explore_fraction: f64,
    pub dual_regularizer: DualRegularizer,
}

impl LearnerParams {
    /// The upper bound `c0 / delta` every dual iterate respects.
    pub fn dual_cap(&self) -> f64 {
        self.c0 / self.delta
    }

    /// Coefficient of `lambda` in the bandit dual contraction.
    pub fn bandit_dual_rate(&self) -> f64 {
        match self.dual_regularizer {
            DualRegularizer::Delta => self.delta,
            DualRegularizer::Gamma => self.gamma,
        }
    }

    /// Cap matching [`Self::bandit_dual_rate`].
    pub fn bandit_dual_cap(&self) -> f64 {
        self.c0 / self.bandit_dual_rate()
    }

    /// `2 eta K <= (1 - gamma) delta / 2`, the step-size condition of the
    /// bandit analysis.
    pub fn bandit_step_condition_holds(&self) -> bool {
        2.0 * self.eta * self.num_actions as f64 <= (1.0 - self.gamma) * self.delta / 2.0
    }
}

/// What the environment reveals after a round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RoundFeedback<'a> {
    /// Full reward and constraint-realization vectors.
    FullInfo { reward: &'a [f64], constraint: &'a [f64] },
    /// Only the played action's reward and constraint realization.
    Bandit { action: usize, reward: f64, constraint: f64 },
}

impl RoundFeedback<'_> {
    /// Checks lengths, action range and that every scalar lies in `[0, 1]`.
    pub fn validate(&self, num_actions: usize) -> Result<()> {
        match *self {
            RoundFeedback::FullInfo { reward, constraint } => {
                for v in [reward, constraint] {
                    if v.len() != num_actions {
                        return Err(Error::DimensionMismatch { expected: num_actions, actual: v.len() });
                    }
                }
                reward.iter().try_for_each(|&x| check_unit("reward vector", x))?;
                constraint.iter().try_for_each(|&x| check_unit("constraint vector", x))
            }
            RoundFeedback::Bandit { action, reward, constraint } => {
                if action >= num_actions {
                    return Err(Error::ActionOutOfRange { index: action, num_actions });
                }
                check_unit("bandit reward", reward)?;
                check_unit("bandit constraint", constraint)
            }
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            RoundFeedback::FullInfo { .. } => "full-information",
            RoundFeedback::Bandit { .. } => "bandit",
        }
    }
}

/// One round of a run as seen by the metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub t: usize,
    /// The distribution actually played (`p_t`, after any exploration mixing).
    pub distribution: ActionDistribution,
    pub sampled_action: Option<usize>,
    pub lambda_before: f64,
    /// Reward of the sampled action, or `p_t^T r_t` when nothing was sampled.
    pub realized_reward: f64,
    /// Constraint realization of the sampled action, or `p_t^T c_t`.
    pub realized_constraint: f64,
}
