//! Online learners behind one `decide` / `update` interface.
//!
//! Every learner keeps its weights in log domain. Constrained learners add a
//! projected dual-gradient step on `lambda` after the primal step, and the
//! primal step always uses the `lambda` from before this round's dual update.

mod estimate;
mod schedule;

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

pub use estimate::ImportanceEstimate;
pub use schedule::{bandit_lewa_eta, lewa_eta, HpBanditConstants, ParamOverrides, DEFAULT_EPSILON};

pub use crate::types::DualRegularizer;

use crate::distribution::{normalize, ActionDistribution, LogWeightVector};
use crate::error::{Error, Result};
use crate::oracle::best_fixed;
use crate::types::{DualVariable, LearnerParams, RoundFeedback};

/// Relative slack allowed when a dual iterate lands above its analytic cap.
/// Only floating-point rounding can cause that.
const DUAL_CAP_ROUNDING: f64 = 1e-12;

/// Log-weights are re-centered once any entry drifts this far from zero.
const RECENTER_THRESHOLD: f64 = 256.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LearnerKind {
    /// Unconstrained exponentially weighted average (Hedge).
    Ewa,
    /// Lagrangian EWA with full-information feedback.
    Lewa,
    /// LEWA driven by running-mean constraint estimates plus confidence widths.
    HpLewa,
    /// Exp3 with uniform mixing.
    Exp3,
    /// LEWA with bandit feedback and importance-weighted estimates.
    BanditLewa,
    /// Bandit LEWA with upper-confidence bonuses.
    HpBanditLewa,
    /// Explore uniformly, then follow the leader over the estimated feasible set.
    ExploreExploit,
}

impl LearnerKind {
    pub const ALL: [LearnerKind; 7] = [
        LearnerKind::Ewa,
        LearnerKind::Lewa,
        LearnerKind::HpLewa,
        LearnerKind::Exp3,
        LearnerKind::BanditLewa,
        LearnerKind::HpBanditLewa,
        LearnerKind::ExploreExploit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LearnerKind::Ewa => "ewa",
            LearnerKind::Lewa => "lewa",
            LearnerKind::HpLewa => "hp-lewa",
            LearnerKind::Exp3 => "exp3",
            LearnerKind::BanditLewa => "bandit-lewa",
            LearnerKind::HpBanditLewa => "hp-bandit-lewa",
            LearnerKind::ExploreExploit => "explore-exploit",
        }
    }

    /// Learners that only see the played coordinate.
    pub fn is_bandit(self) -> bool {
        matches!(self, LearnerKind::Exp3 | LearnerKind::BanditLewa | LearnerKind::HpBanditLewa)
    }

    /// Learners that maintain a dual variable.
    pub fn is_constrained(self) -> bool {
        matches!(
            self,
            LearnerKind::Lewa | LearnerKind::HpLewa | LearnerKind::BanditLewa | LearnerKind::HpBanditLewa
        )
    }
}

impl fmt::Display for LearnerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LearnerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let wanted = s.trim().to_ascii_lowercase().replace('_', "-");
        LearnerKind::ALL
            .into_iter()
            .find(|k| k.name() == wanted)
            .ok_or_else(|| crate::error::invalid("kind", alloc::format!("unknown learner `{s}`")))
    }
}

/// State for the explore-then-exploit foil.
#[derive(Debug, Clone)]
struct ExploreState {
    explore_rounds: usize,
    reward_sums: Vec<f64>,
    constraint_sums: Vec<f64>,
    plan: Option<ActionDistribution>,
}

/// A single-owner online learner. Call [`Learner::decide`] and then
/// [`Learner::update`] once per round.
#[derive(Debug, Clone)]
pub struct Learner {
    kind: LearnerKind,
    params: LearnerParams,
    log_w: LogWeightVector,
    lambda: DualVariable,
    t: usize,
    /// Sum of observed constraint vectors (HP-LEWA's running mean numerator).
    constraint_sums: Vec<f64>,
    /// Sum of importance-weighted constraint estimates (HP bandit).
    estimated_constraint_sums: Vec<f64>,
    /// Per-action sum of `1 / p_i` over played distributions (HP bandit).
    inverse_prob_sums: Vec<f64>,
    hp_bandit: Option<HpBanditConstants>,
    explore: Option<ExploreState>,
}

/// Builds a learner with default schedules, replaced by any `overrides`.
pub fn make_learner(
    kind: LearnerKind,
    num_actions: usize,
    horizon: usize,
    c0: f64,
    overrides: &ParamOverrides,
) -> Result<Learner> {
    let params = schedule::derive(kind, num_actions, horizon, c0, overrides)?;
    let hp_bandit = (kind == LearnerKind::HpBanditLewa)
        .then(|| HpBanditConstants::new(num_actions, horizon, params.epsilon));
    let initial_level = match hp_bandit {
        // w_1 = exp(eta * alpha * sqrt(KT)) * 1
        Some(h) => params.eta * h.alpha * libm::sqrt(num_actions as f64 * horizon as f64),
        None => 0.0,
    };
    let explore = (kind == LearnerKind::ExploreExploit).then(|| ExploreState {
        explore_rounds: (libm::ceil(params.explore_fraction * horizon as f64) as usize).clamp(1, horizon),
        reward_sums: alloc::vec![0.0; num_actions],
        constraint_sums: alloc::vec![0.0; num_actions],
        plan: None,
    });
    Ok(Learner {
        kind,
        params,
        log_w: LogWeightVector::constant(num_actions, initial_level),
        lambda: DualVariable::ZERO,
        t: 0,
        constraint_sums: alloc::vec![0.0; num_actions],
        estimated_constraint_sums: alloc::vec![0.0; num_actions],
        inverse_prob_sums: alloc::vec![0.0; num_actions],
        hp_bandit,
        explore,
    })
}

impl Learner {
    pub fn kind(&self) -> LearnerKind {
        self.kind
    }

    pub fn params(&self) -> &LearnerParams {
        &self.params
    }

    pub fn num_actions(&self) -> usize {
        self.params.num_actions
    }

    /// Number of completed updates.
    pub fn rounds(&self) -> usize {
        self.t
    }

    pub fn lambda(&self) -> DualVariable {
        self.lambda
    }

    pub fn log_weights(&self) -> &LogWeightVector {
        &self.log_w
    }

    pub fn hp_bandit_constants(&self) -> Option<&HpBanditConstants> {
        self.hp_bandit.as_ref()
    }

    /// Upper bound on `lambda` implied by the dual recursion.
    pub fn dual_cap(&self) -> f64 {
        match self.kind {
            LearnerKind::BanditLewa => self.params.bandit_dual_cap(),
            k if k.is_constrained() => self.params.dual_cap(),
            _ => 0.0,
        }
    }

    /// Minimum probability every played distribution guarantees (`gamma / K`
    /// for bandit learners, zero otherwise).
    pub fn exploration_floor(&self) -> f64 {
        if self.kind.is_bandit() {
            self.params.gamma / self.params.num_actions as f64
        } else {
            0.0
        }
    }

    /// Replaces the dual variable; used for warm starts.
    pub fn set_dual(&mut self, lambda: DualVariable) {
        self.lambda = lambda;
    }

    /// Replaces the weights; used for warm starts.
    pub fn set_log_weights(&mut self, log_w: LogWeightVector) -> Result<()> {
        if log_w.len() != self.num_actions() {
            return Err(Error::DimensionMismatch { expected: self.num_actions(), actual: log_w.len() });
        }
        self.log_w = log_w;
        Ok(())
    }

    /// HP-LEWA's running constraint mean `(1/t) sum_s c_s`.
    pub fn running_constraint_mean(&self) -> Vec<f64> {
        running_mean(&self.constraint_sums, self.t)
    }

    /// HP bandit learner's running mean of importance-weighted constraint
    /// estimates.
    pub fn running_estimated_constraint_mean(&self) -> Vec<f64> {
        running_mean(&self.estimated_constraint_sums, self.t)
    }

    pub fn inverse_prob_sums(&self) -> &[f64] {
        &self.inverse_prob_sums
    }

    /// `sigma_i^t = sqrt(KT) + (1 / KT) sum_s 1 / p_i^s`, the confidence
    /// scale behind the reward bonus of the HP bandit learner.
    pub fn sigma(&self, action: usize) -> f64 {
        let kt = self.params.num_actions as f64 * self.params.horizon as f64;
        libm::sqrt(kt) + self.inverse_prob_sums[action] / kt
    }

    /// The exponential-weights distribution `q_t = w_t / sum_j w_j`, before
    /// any exploration mixing.
    pub fn weights_distribution(&self) -> ActionDistribution {
        normalize(&self.log_w)
    }

    /// The distribution to play this round. Does not mutate state.
    pub fn decide(&self) -> ActionDistribution {
        match self.kind {
            LearnerKind::Ewa | LearnerKind::Lewa | LearnerKind::HpLewa => normalize(&self.log_w),
            LearnerKind::Exp3 | LearnerKind::BanditLewa | LearnerKind::HpBanditLewa => {
                normalize(&self.log_w).mix_uniform(self.params.gamma)
            }
            LearnerKind::ExploreExploit => {
                let state = self.explore.as_ref().expect("explore state present");
                match &state.plan {
                    Some(plan) if self.t >= state.explore_rounds => plan.clone(),
                    _ => ActionDistribution::uniform(self.params.num_actions),
                }
            }
        }
    }

    /// Dispatches to [`Self::update_full`] or [`Self::update_bandit`].
    pub fn update(&mut self, feedback: &RoundFeedback<'_>) -> Result<()> {
        match *feedback {
            RoundFeedback::FullInfo { reward, constraint } => self.update_full(reward, constraint),
            RoundFeedback::Bandit { action, reward, constraint } => self.update_bandit(action, reward, constraint),
        }
    }

    /// Full-information step for EWA, LEWA, HP-LEWA and explore-then-exploit.
    pub fn update_full(&mut self, reward: &[f64], constraint: &[f64]) -> Result<()> {
        if self.kind.is_bandit() {
            return Err(Error::WrongFeedback { kind: self.kind.name(), feedback: "full-information" });
        }
        RoundFeedback::FullInfo { reward, constraint }.validate(self.num_actions())?;
        let played = self.decide();
        let eta = self.params.eta;
        let lambda = self.lambda.value();

        match self.kind {
            LearnerKind::Ewa => {
                self.log_w.add_scaled(eta, reward);
            }
            LearnerKind::Lewa => {
                let gain: Vec<f64> = reward.iter().zip(constraint).map(|(r, c)| r + lambda * c).collect();
                self.log_w.add_scaled(eta, &gain);
                let beta = played.dot(constraint);
                self.dual_step(self.params.delta, beta)?;
            }
            LearnerKind::HpLewa => {
                for (s, c) in self.constraint_sums.iter_mut().zip(constraint) {
                    *s += c;
                }
                let round = self.t + 1;
                let mean = running_mean(&self.constraint_sums, round);
                let gain: Vec<f64> = reward.iter().zip(&mean).map(|(r, c)| r + lambda * c).collect();
                self.log_w.add_scaled(eta, &gain);
                let width = libm::sqrt(0.5 * libm::log(2.0 / self.params.epsilon)) / libm::sqrt(round as f64);
                let beta = played.dot(&mean) + width;
                self.dual_step(self.params.delta, beta)?;
            }
            LearnerKind::ExploreExploit => self.explore_step(reward, constraint),
            _ => unreachable!("bandit kinds rejected above"),
        }
        self.finish_round();
        Ok(())
    }

    /// Bandit step for Exp3, bandit LEWA and its high-probability variant.
    ///
    /// The importance weights use the played (mixed) probability of `action`
    /// under this round's [`Self::decide`].
    pub fn update_bandit(&mut self, action: usize, reward: f64, constraint: f64) -> Result<()> {
        if !self.kind.is_bandit() {
            return Err(Error::WrongFeedback { kind: self.kind.name(), feedback: "bandit" });
        }
        let k = self.num_actions();
        RoundFeedback::Bandit { action, reward, constraint }.validate(k)?;
        let q = self.weights_distribution();
        let played = q.mix_uniform(self.params.gamma);
        let p_played = played.probs()[action];
        let r_hat = ImportanceEstimate::new(k, action, reward, p_played)?;
        let c_hat = ImportanceEstimate::new(k, action, constraint, p_played)?;
        let eta = self.params.eta;
        let lambda = self.lambda.value();

        match self.kind {
            LearnerKind::Exp3 => {
                self.log_w.add_scaled(eta, r_hat.values());
            }
            LearnerKind::BanditLewa => {
                let gain: Vec<f64> =
                    r_hat.values().iter().zip(c_hat.values()).map(|(r, c)| r + lambda * c).collect();
                self.log_w.add_scaled(eta, &gain);
                let beta = q.dot(c_hat.values());
                self.dual_step(self.params.bandit_dual_rate(), beta)?;
            }
            LearnerKind::HpBanditLewa => {
                let h = self.hp_bandit.expect("constants set for HP bandit learner");
                let round = self.t + 1;
                for (s, p) in self.inverse_prob_sums.iter_mut().zip(played.probs()) {
                    *s += 1.0 / p;
                }
                for (s, c) in self.estimated_constraint_sums.iter_mut().zip(c_hat.values()) {
                    *s += c;
                }
                let c_tilde = running_mean(&self.estimated_constraint_sums, round);
                let sqrt_kt = libm::sqrt(k as f64 * self.params.horizon as f64);
                let constraint_bonus = 2.0 * k as f64 / self.params.gamma * h.width(round);
                // Applied on top of w_t (multiplicative form, as in Exp3.P).
                let gain: Vec<f64> = (0..k)
                    .map(|i| {
                        let reward_ucb = r_hat.entry(i) + h.alpha / (played.probs()[i] * sqrt_kt);
                        reward_ucb + lambda * (c_tilde[i] + constraint_bonus)
                    })
                    .collect();
                self.log_w.add_scaled(eta, &gain);
                let beta = q.dot(c_hat.values()) + h.width(round);
                self.dual_step(self.params.delta, beta)?;
            }
            _ => unreachable!("full-information kinds rejected above"),
        }
        self.finish_round();
        Ok(())
    }

    /// `lambda <- [(1 - rate * eta) lambda - eta (beta - c0)]_+`.
    ///
    /// With `beta >= 0` the iterate never exceeds `c0 / rate`; a result above
    /// the cap by more than rounding is reported as an internal error.
    fn dual_step(&mut self, rate: f64, beta: f64) -> Result<()> {
        debug_assert!(beta >= 0.0);
        let eta = self.params.eta;
        let raw = (1.0 - rate * eta) * self.lambda.value() - eta * (beta - self.params.c0);
        let cap = self.params.c0 / rate;
        let mut next = DualVariable::project(raw);
        if next.value() > cap {
            if next.value() - cap > DUAL_CAP_ROUNDING * cap {
                return Err(Error::Internal(alloc::format!(
                    "dual iterate {} exceeds cap {cap} at round {}",
                    next.value(),
                    self.t + 1
                )));
            }
            next = DualVariable::project(cap);
        }
        self.lambda = next;
        Ok(())
    }

    fn explore_step(&mut self, reward: &[f64], constraint: &[f64]) {
        let c0 = self.params.c0;
        let round = self.t + 1;
        let state = self.explore.as_mut().expect("explore state present");
        for (s, r) in state.reward_sums.iter_mut().zip(reward) {
            *s += r;
        }
        if round <= state.explore_rounds {
            for (s, c) in state.constraint_sums.iter_mut().zip(constraint) {
                *s += c;
            }
        }
        if round >= state.explore_rounds {
            // Constraint estimate is frozen after exploration; rewards keep accumulating.
            let c_est = running_mean(&state.constraint_sums, state.explore_rounds);
            state.plan = Some(match best_fixed(&state.reward_sums, &c_est, c0) {
                Ok(sol) => sol.distribution,
                Err(_) => {
                    let best = argmax(&c_est);
                    ActionDistribution::vertex(c_est.len(), best)
                }
            });
        }
    }

    fn finish_round(&mut self) {
        self.t += 1;
        let far = self.log_w.as_slice().iter().any(|x| x.abs() > RECENTER_THRESHOLD);
        if far {
            self.log_w.recenter();
        }
    }
}

fn running_mean(sums: &[f64], count: usize) -> Vec<f64> {
    if count == 0 {
        return alloc::vec![0.0; sums.len()];
    }
    let n = count as f64;
    sums.iter().map(|s| s / n).collect()
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}
