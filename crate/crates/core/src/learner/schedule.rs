//! Default step-size schedules and user overrides.

use crate::error::{invalid, Result};
use crate::types::{DualRegularizer, LearnerParams};

use super::LearnerKind;

/// Default confidence level for the high-probability learners.
pub const DEFAULT_EPSILON: f64 = 0.1;

/// Caller-supplied replacements for any default schedule value.
///
/// Values that are derived from others (for example the bandit learning rate,
/// which depends on `gamma` and `delta`) are recomputed from the overridden
/// inputs unless they are themselves overridden.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ParamOverrides {
    pub eta: Option<f64>,
    pub delta: Option<f64>,
    pub gamma: Option<f64>,
    pub epsilon: Option<f64>,
    pub explore_fraction: Option<f64>,
    pub dual_regularizer: Option<DualRegularizer>,
}

impl ParamOverrides {
    pub fn is_empty(&self) -> bool {
        *self == Self::default()
    }
}

/// Confidence constants of the high-probability bandit learner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HpBanditConstants {
    /// Reward upper-confidence scale, `2 sqrt(ln(4KT / eps))`.
    pub alpha: f64,
    /// First constraint confidence width, `sqrt(ln(6KT / eps) / 2)`.
    pub alpha1: f64,
    /// `max(3, 1 + 2 alpha1)`.
    pub beta: f64,
}

impl HpBanditConstants {
    pub fn new(num_actions: usize, horizon: usize, epsilon: f64) -> Self {
        let kt = num_actions as f64 * horizon as f64;
        let alpha = 2.0 * libm::sqrt(libm::log(4.0 * kt / epsilon));
        let alpha1 = libm::sqrt(0.5 * libm::log(6.0 * kt / epsilon));
        Self { alpha, alpha1, beta: f64::max(3.0, 1.0 + 2.0 * alpha1) }
    }

    /// `alpha_t = alpha1 / sqrt(t)` for the 1-based round `t`.
    pub fn width(&self, t: usize) -> f64 {
        self.alpha1 / libm::sqrt(t as f64)
    }
}

/// `sqrt(4 ln K / (9 T))`, the full-information LEWA rate.
pub fn lewa_eta(num_actions: usize, horizon: usize) -> f64 {
    libm::sqrt(4.0 * libm::log(num_actions as f64) / (9.0 * horizon as f64))
}

/// `(gamma / K) * delta / (delta + 1)`.
pub fn bandit_lewa_eta(num_actions: usize, gamma: f64, delta: f64) -> f64 {
    gamma / num_actions as f64 * delta / (delta + 1.0)
}

pub(crate) fn derive(
    kind: LearnerKind,
    num_actions: usize,
    horizon: usize,
    c0: f64,
    ov: &ParamOverrides,
) -> Result<LearnerParams> {
    if num_actions < 2 {
        return Err(invalid("num_actions", alloc::format!("need at least 2 actions, got {num_actions}")));
    }
    if horizon == 0 {
        return Err(invalid("horizon", "must be positive"));
    }
    if !(0.0..=1.0).contains(&c0) {
        return Err(invalid("c0", alloc::format!("{c0} outside [0, 1]")));
    }
    let k = num_actions as f64;
    let t = horizon as f64;
    let epsilon = ov.epsilon.unwrap_or(DEFAULT_EPSILON);

    let mut params = LearnerParams {
        eta: 0.0,
        delta: 0.0,
        gamma: 0.0,
        epsilon,
        horizon,
        num_actions,
        c0,
        explore_fraction: 0.0,
        dual_regularizer: ov.dual_regularizer.unwrap_or_default(),
    };

    match kind {
        LearnerKind::Ewa => {
            params.eta = ov.eta.unwrap_or_else(|| libm::sqrt(8.0 * libm::log(k) / t));
            params.delta = ov.delta.unwrap_or(params.eta / 2.0);
        }
        LearnerKind::Lewa | LearnerKind::HpLewa => {
            params.eta = ov.eta.unwrap_or_else(|| lewa_eta(num_actions, horizon));
            params.delta = ov.delta.unwrap_or(params.eta / 2.0);
        }
        LearnerKind::Exp3 => {
            let default_gamma = f64::min(1.0, libm::sqrt(k * libm::log(k) / ((core::f64::consts::E - 1.0) * t)));
            params.gamma = ov.gamma.unwrap_or(default_gamma);
            params.eta = ov.eta.unwrap_or(params.gamma / k);
            params.delta = ov.delta.unwrap_or(1.0);
        }
        LearnerKind::BanditLewa => {
            params.delta = ov.delta.unwrap_or_else(|| 1.0 / libm::pow(t, 0.25));
            params.gamma = ov.gamma.unwrap_or_else(|| f64::min(0.2, 1.0 / libm::pow(t, 0.25)));
            params.eta = ov.eta.unwrap_or_else(|| bandit_lewa_eta(num_actions, params.gamma, params.delta));
            if ov.gamma.is_none() && ov.eta.is_none() {
                while !params.bandit_step_condition_holds() && params.gamma > f64::MIN_POSITIVE {
                    params.gamma /= 2.0;
                    params.eta = bandit_lewa_eta(num_actions, params.gamma, params.delta);
                }
            }
            if !params.bandit_step_condition_holds() {
                return Err(invalid(
                    "eta",
                    alloc::format!(
                        "2 eta K = {} exceeds (1 - gamma) delta / 2 = {}",
                        2.0 * params.eta * k,
                        (1.0 - params.gamma) * params.delta / 2.0
                    ),
                ));
            }
        }
        LearnerKind::HpBanditLewa => {
            params.delta = ov.delta.unwrap_or_else(|| 1.0 / libm::pow(t, 0.25));
            params.gamma = ov.gamma.unwrap_or_else(|| f64::min(0.2, 1.0 / libm::pow(t, 0.25)));
            let beta = HpBanditConstants::new(num_actions, horizon, epsilon).beta;
            params.eta = ov
                .eta
                .unwrap_or_else(|| params.gamma / (beta * k) * params.delta / (params.delta + 1.0));
        }
        LearnerKind::ExploreExploit => {
            params.explore_fraction = ov.explore_fraction.unwrap_or_else(|| f64::min(1.0, 1.0 / libm::cbrt(t)));
            // unused, kept positive so the shared validation passes
            params.eta = ov.eta.unwrap_or(1.0);
            params.delta = ov.delta.unwrap_or(1.0);
        }
    }

    validate(kind, &params)?;
    Ok(params)
}

fn validate(kind: LearnerKind, p: &LearnerParams) -> Result<()> {
    if !(p.eta.is_finite() && p.eta > 0.0) {
        return Err(invalid("eta", alloc::format!("{} is not a positive number", p.eta)));
    }
    if !(p.delta.is_finite() && p.delta > 0.0) {
        return Err(invalid("delta", alloc::format!("{} is not a positive number", p.delta)));
    }
    if !(p.epsilon > 0.0 && p.epsilon < 1.0) {
        return Err(invalid("epsilon", alloc::format!("{} outside (0, 1)", p.epsilon)));
    }
    if kind.is_bandit() && !(p.gamma > 0.0 && p.gamma <= 1.0) {
        return Err(invalid("gamma", alloc::format!("{} outside (0, 1]", p.gamma)));
    }
    if kind.is_constrained() {
        let rate = if kind == LearnerKind::BanditLewa { p.bandit_dual_rate() } else { p.delta };
        // keeps 1 - rate * eta >= 0, which the lambda <= c0 / rate induction needs
        if rate * p.eta > 1.0 {
            return Err(invalid("delta", alloc::format!("dual contraction {rate} * eta = {} exceeds 1", rate * p.eta)));
        }
    }
    if kind == LearnerKind::ExploreExploit && !(p.explore_fraction > 0.0 && p.explore_fraction <= 1.0) {
        return Err(invalid("explore_fraction", alloc::format!("{} outside (0, 1]", p.explore_fraction)));
    }
    Ok(())
}
