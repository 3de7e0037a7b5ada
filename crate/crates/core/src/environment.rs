//! Oblivious environments: an adversarial-style reward process plus a
//! stochastic constraint whose realizations are Bernoulli around a fixed mean.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use rand::Rng;

use crate::error::{check_unit, invalid, Error, Result};
use crate::rng::{stream_rng, Stream};

/// Unknown constraint mean `c` and threshold `c0`; realizations
/// `c_t,i ~ Bernoulli(c_i)` independently across actions and rounds.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintModel {
    mean: Vec<f64>,
    threshold: f64,
}

impl ConstraintModel {
    /// Infeasible models (`max_i c_i < c0`) are allowed; see [`Self::is_feasible`].
    pub fn new(mean: Vec<f64>, threshold: f64) -> Result<Self> {
        if mean.is_empty() {
            return Err(invalid("constraint_mean", "need at least one action"));
        }
        mean.iter().try_for_each(|&c| check_unit("constraint mean", c))?;
        check_unit("c0", threshold)?;
        Ok(Self { mean, threshold })
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn num_actions(&self) -> usize {
        self.mean.len()
    }

    pub fn is_feasible(&self) -> bool {
        self.mean.iter().any(|&c| c >= self.threshold)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RewardProcess {
    /// `r_t,i ~ Bernoulli(means_i)`, i.i.d. over rounds.
    IidBernoulli { means: Vec<f64> },
    /// Bernoulli rewards whose means alternate between `means_a` and
    /// `means_b` every `period` rounds.
    Switching { means_a: Vec<f64>, means_b: Vec<f64>, period: usize },
    /// Deterministic `r_t,i = clip(base_i + amplitude * s_t,i)` where `s_t,i`
    /// is a half-amplitude sinusoid spanning the horizon once. Every
    /// `|r_t,i - mean_i| <= amplitude`.
    LowVariation { base: Vec<f64>, amplitude: f64 },
}

impl RewardProcess {
    pub fn num_actions(&self) -> usize {
        match self {
            RewardProcess::IidBernoulli { means } => means.len(),
            RewardProcess::Switching { means_a, .. } => means_a.len(),
            RewardProcess::LowVariation { base, .. } => base.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check_all = |v: &[f64]| v.iter().try_for_each(|&x| check_unit("reward parameter", x));
        match self {
            RewardProcess::IidBernoulli { means } => check_all(means)?,
            RewardProcess::Switching { means_a, means_b, period } => {
                check_all(means_a)?;
                check_all(means_b)?;
                if means_a.len() != means_b.len() {
                    return Err(Error::DimensionMismatch { expected: means_a.len(), actual: means_b.len() });
                }
                if *period == 0 {
                    return Err(invalid("period", "must be positive"));
                }
            }
            RewardProcess::LowVariation { base, amplitude } => {
                check_all(base)?;
                check_unit("amplitude", *amplitude)?;
            }
        }
        if self.num_actions() == 0 {
            return Err(invalid("rewards", "need at least one action"));
        }
        Ok(())
    }
}

/// A complete, learner-independent sequence of reward and constraint vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentTrace {
    num_actions: usize,
    /// Row-major `T x K`.
    rewards: Vec<f64>,
    /// Row-major `T x K`.
    constraints: Vec<f64>,
    model: ConstraintModel,
    seed: u64,
}

impl EnvironmentTrace {
    /// Assembles a trace from row-major `T x K` buffers, e.g. one read back
    /// from disk.
    pub fn from_parts(rewards: Vec<f64>, constraints: Vec<f64>, model: ConstraintModel, seed: u64) -> Result<Self> {
        let k = model.num_actions();
        if rewards.len() != constraints.len() || !rewards.len().is_multiple_of(k) {
            return Err(Error::DimensionMismatch { expected: rewards.len(), actual: constraints.len() });
        }
        rewards.iter().try_for_each(|&x| check_unit("trace reward", x))?;
        constraints.iter().try_for_each(|&x| check_unit("trace constraint", x))?;
        Ok(Self { num_actions: k, rewards, constraints, model, seed })
    }

    pub fn horizon(&self) -> usize {
        self.rewards.len() / self.num_actions
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn reward(&self, t: usize) -> &[f64] {
        &self.rewards[t * self.num_actions..(t + 1) * self.num_actions]
    }

    pub fn constraint(&self, t: usize) -> &[f64] {
        &self.constraints[t * self.num_actions..(t + 1) * self.num_actions]
    }

    pub fn rewards(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.rewards.chunks_exact(self.num_actions)
    }

    pub fn constraints(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.constraints.chunks_exact(self.num_actions)
    }

    pub fn model(&self) -> &ConstraintModel {
        &self.model
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `sum_t r_t`.
    pub fn cumulative_reward(&self) -> Vec<f64> {
        let mut total = alloc::vec![0.0; self.num_actions];
        for r in self.rewards() {
            for (s, x) in total.iter_mut().zip(r) {
                *s += x;
            }
        }
        total
    }
}

/// Draws a trace of `horizon` rounds. Rewards and constraint realizations use
/// separate streams derived from `seed`, so the same inputs always give the
/// same trace.
pub fn generate(process: &RewardProcess, model: &ConstraintModel, horizon: usize, seed: u64) -> Result<EnvironmentTrace> {
    process.validate()?;
    if horizon == 0 {
        return Err(invalid("horizon", "must be positive"));
    }
    let k = process.num_actions();
    if k != model.num_actions() {
        return Err(Error::DimensionMismatch { expected: k, actual: model.num_actions() });
    }

    let mut reward_rng = stream_rng(seed, Stream::Rewards);
    let mut constraint_rng = stream_rng(seed, Stream::Constraints);
    let mut rewards = Vec::with_capacity(horizon * k);
    let mut constraints = Vec::with_capacity(horizon * k);

    for t in 0..horizon {
        match process {
            RewardProcess::IidBernoulli { means } => {
                rewards.extend(means.iter().map(|&m| bernoulli(&mut reward_rng, m)));
            }
            RewardProcess::Switching { means_a, means_b, period } => {
                let means = if (t / period) % 2 == 0 { means_a } else { means_b };
                rewards.extend(means.iter().map(|&m| bernoulli(&mut reward_rng, m)));
            }
            RewardProcess::LowVariation { base, amplitude } => {
                let phase = TAU * t as f64 / horizon as f64;
                rewards.extend(base.iter().enumerate().map(|(i, &b)| {
                    let s = 0.5 * libm::sin(phase + TAU * i as f64 / k as f64);
                    (b + amplitude * s).clamp(0.0, 1.0)
                }));
            }
        }
        constraints.extend(model.mean().iter().map(|&c| bernoulli(&mut constraint_rng, c)));
    }

    Ok(EnvironmentTrace { num_actions: k, rewards, constraints, model: model.clone(), seed })
}

fn bernoulli<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> f64 {
    let u: f64 = rng.random();
    if u < mean {
        1.0
    } else {
        0.0
    }
}
