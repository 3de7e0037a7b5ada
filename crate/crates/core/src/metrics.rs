//! Post-hoc run metrics: constrained regret (expected and realized),
//! long-term constraint violation, reward variation and log-log growth fits.

use alloc::vec::Vec;

use crate::environment::{ConstraintModel, EnvironmentTrace};
use crate::error::{invalid, Error, Result};
use crate::oracle::{best_fixed, ComparatorSolution};
use crate::types::RoundRecord;

fn check_lengths(records: &[RoundRecord], trace: &EnvironmentTrace) -> Result<()> {
    if records.len() != trace.horizon() {
        return Err(Error::DimensionMismatch { expected: trace.horizon(), actual: records.len() });
    }
    Ok(())
}

/// Best fixed distribution with `p^T c >= c0` for the trace's cumulative
/// reward, using the true constraint mean.
pub fn comparator(trace: &EnvironmentTrace) -> Result<ComparatorSolution> {
    let model = trace.model();
    best_fixed(&trace.cumulative_reward(), model.mean(), model.threshold())
}

/// `sum_t p_t^T r_t`.
pub fn expected_reward(records: &[RoundRecord], trace: &EnvironmentTrace) -> Result<f64> {
    check_lengths(records, trace)?;
    Ok(records.iter().zip(trace.rewards()).map(|(rec, r)| rec.distribution.dot(r)).sum())
}

/// `sum_t r_t[i_t]` over the sampled actions.
pub fn sampled_reward(records: &[RoundRecord], trace: &EnvironmentTrace) -> Result<f64> {
    check_lengths(records, trace)?;
    records
        .iter()
        .zip(trace.rewards())
        .map(|(rec, r)| {
            rec.sampled_action
                .map(|i| r[i])
                .ok_or_else(|| invalid("records", alloc::format!("round {} has no sampled action", rec.t)))
        })
        .sum()
}

/// Comparator value minus `sum_t p_t^T r_t`. May be negative, since the
/// learner is not held to the constraint round by round.
pub fn regret(records: &[RoundRecord], trace: &EnvironmentTrace) -> Result<f64> {
    let earned = expected_reward(records, trace)?;
    Ok(comparator(trace)?.value - earned)
}

/// Comparator value minus the rewards of the sampled actions.
pub fn realized_regret(records: &[RoundRecord], trace: &EnvironmentTrace) -> Result<f64> {
    let earned = sampled_reward(records, trace)?;
    Ok(comparator(trace)?.value - earned)
}

/// `[sum_t (c0 - p_t^T c)]_+` against the true constraint mean.
pub fn violation(records: &[RoundRecord], model: &ConstraintModel) -> f64 {
    let c0 = model.threshold();
    let shortfall: f64 = records.iter().map(|rec| c0 - rec.distribution.dot(model.mean())).sum();
    shortfall.max(0.0)
}

/// `sum_t ||r_t - r_bar||_inf` with `r_bar` the empirical mean reward vector.
pub fn variation(trace: &EnvironmentTrace) -> f64 {
    let horizon = trace.horizon();
    if horizon == 0 {
        return 0.0;
    }
    let mean: Vec<f64> = trace.cumulative_reward().iter().map(|s| s / horizon as f64).collect();
    trace
        .rewards()
        .map(|r| r.iter().zip(&mean).map(|(x, m)| (x - m).abs()).fold(0.0, f64::max))
        .sum()
}

/// Least-squares slope of `ln(max(metric, 1))` against `ln T`.
pub fn fit_exponent(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 3 {
        return Err(Error::TooFewPoints(points.len()));
    }
    for (i, &(t, m)) in points.iter().enumerate() {
        if !(t >= 2.0 && t.is_finite()) || !m.is_finite() {
            return Err(invalid("points", alloc::format!("need finite T >= 2 and finite metric, got ({t}, {m})")));
        }
        if points[..i].iter().any(|&(s, _)| s == t) {
            return Err(invalid("points", alloc::format!("duplicate horizon {t}")));
        }
    }
    let xs: Vec<f64> = points.iter().map(|&(t, _)| libm::log(t)).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, m)| libm::log(m.max(1.0))).collect();
    let n = points.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

/// All end-of-run metrics for one learner on one trace.
#[derive(Debug, Clone)]
pub struct RunResult<'a> {
    pub records: Vec<RoundRecord>,
    pub trace: &'a EnvironmentTrace,
    pub regret: f64,
    pub realized_regret: f64,
    pub violation: f64,
    pub variation: f64,
    pub comparator: ComparatorSolution,
}

impl<'a> RunResult<'a> {
    /// Computes every metric. Requires sampled actions in all records.
    pub fn evaluate(records: Vec<RoundRecord>, trace: &'a EnvironmentTrace) -> Result<Self> {
        let comparator = comparator(trace)?;
        let regret = comparator.value - expected_reward(&records, trace)?;
        let realized_regret = comparator.value - sampled_reward(&records, trace)?;
        let violation = violation(&records, trace.model());
        let variation = variation(trace);
        Ok(Self { records, trace, regret, realized_regret, violation, variation, comparator })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::ActionDistribution;
    use alloc::vec;
    use proptest::prelude::*;

    fn record(t: usize, probs: Vec<f64>, action: Option<usize>) -> RoundRecord {
        RoundRecord {
            t,
            distribution: ActionDistribution::new(probs).unwrap(),
            sampled_action: action,
            lambda_before: 0.0,
            realized_reward: 0.0,
            realized_constraint: 0.0,
        }
    }

    fn trace(rewards: Vec<Vec<f64>>, mean: Vec<f64>, c0: f64) -> EnvironmentTrace {
        let k = mean.len();
        let flat: Vec<f64> = rewards.concat();
        let cons = vec![0.0; flat.len()];
        assert_eq!(flat.len() % k, 0);
        EnvironmentTrace::from_parts(flat, cons, ConstraintModel::new(mean, c0).unwrap(), 0).unwrap()
    }

    #[test]
    fn playing_the_comparator_has_zero_regret() {
        let tr = trace(vec![vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]], vec![0.2, 0.8], 0.5);
        let sol = comparator(&tr).unwrap();
        let recs: Vec<_> = (0..4).map(|t| record(t, sol.distribution.probs().to_vec(), Some(0))).collect();
        assert!(regret(&recs, &tr).unwrap().abs() < 1e-12);
    }

    #[test]
    fn single_round_regret() {
        let tr = trace(vec![vec![0.0, 1.0]], vec![0.5, 0.5], 0.0);
        let recs = vec![record(0, vec![1.0, 0.0], Some(0))];
        assert_eq!(regret(&recs, &tr).unwrap(), 1.0);
        assert_eq!(realized_regret(&recs, &tr).unwrap(), 1.0);
    }

    #[test]
    fn deterministic_play_realized_equals_expected() {
        let tr = trace(vec![vec![0.3, 0.9]; 5], vec![0.6, 0.7], 0.5);
        let recs: Vec<_> = (0..5).map(|t| record(t, vec![0.0, 1.0], Some(1))).collect();
        assert_eq!(regret(&recs, &tr).unwrap(), realized_regret(&recs, &tr).unwrap());
    }

    #[test]
    fn empty_horizon() {
        let tr = trace(vec![], vec![0.6, 0.7], 0.5);
        assert_eq!(realized_regret(&[], &tr).unwrap(), 0.0);
        assert_eq!(regret(&[], &tr).unwrap(), 0.0);
        assert_eq!(variation(&tr), 0.0);
    }

    #[test]
    fn length_mismatch_and_missing_samples() {
        let tr = trace(vec![vec![0.0, 1.0]; 2], vec![0.5, 0.5], 0.0);
        let one = vec![record(0, vec![1.0, 0.0], Some(0))];
        assert!(matches!(regret(&one, &tr), Err(Error::DimensionMismatch { .. })));
        let unsampled = vec![record(0, vec![1.0, 0.0], None), record(1, vec![1.0, 0.0], None)];
        assert!(regret(&unsampled, &tr).is_ok());
        assert!(realized_regret(&unsampled, &tr).is_err());
    }

    #[test]
    fn infeasible_model_propagates() {
        let tr = trace(vec![vec![0.0, 1.0]], vec![0.1, 0.2], 0.5);
        let recs = vec![record(0, vec![1.0, 0.0], Some(0))];
        assert!(matches!(regret(&recs, &tr), Err(Error::Infeasible { .. })));
    }

    #[test]
    fn violation_examples() {
        let m = ConstraintModel::new(vec![0.0, 1.0], 0.5).unwrap();
        let ok: Vec<_> = (0..10).map(|t| record(t, vec![0.4, 0.6], None)).collect();
        assert_eq!(violation(&ok, &m), 0.0);
        let bad: Vec<_> = (0..100).map(|t| record(t, vec![1.0, 0.0], None)).collect();
        assert_eq!(violation(&bad, &m), 50.0);
    }

    #[test]
    fn variation_examples() {
        assert_eq!(variation(&trace(vec![vec![0.3, 0.6]; 7], vec![0.5, 0.5], 0.0)), 0.0);
        assert_eq!(variation(&trace(vec![vec![0.0, 0.0], vec![1.0, 1.0]], vec![0.5, 0.5], 0.0)), 1.0);
    }

    #[test]
    fn exponent_of_exact_power_laws() {
        let ts = [16.0, 64.0, 256.0, 1024.0, 4096.0];
        let fit = |f: &dyn Fn(f64) -> f64| fit_exponent(&ts.iter().map(|&t| (t, f(t))).collect::<Vec<_>>()).unwrap();
        assert!((fit(&|t| t) - 1.0).abs() < 1e-9);
        assert!((fit(&|t| libm::sqrt(t)) - 0.5).abs() < 1e-9);
        assert!((fit(&|t| 7.0 * libm::pow(t, 0.75)) - 0.75).abs() < 1e-9);
        // clipped below at one
        assert_eq!(fit(&|_| 0.0), 0.0);
    }

    #[test]
    fn exponent_fit_rejects_bad_input() {
        assert!(matches!(fit_exponent(&[(2.0, 1.0), (4.0, 2.0)]), Err(Error::TooFewPoints(2))));
        assert!(fit_exponent(&[(2.0, 1.0), (2.0, 2.0), (8.0, 3.0)]).is_err());
        assert!(fit_exponent(&[(1.0, 1.0), (2.0, 2.0), (8.0, 3.0)]).is_err());
    }

    proptest! {
        #[test]
        fn variation_ignores_round_order(
            rows in proptest::collection::vec(proptest::collection::vec(0.0f64..=1.0, 3), 1..40),
            rot in 0usize..40,
        ) {
            let a = trace(rows.clone(), vec![0.5; 3], 0.0);
            let mut shuffled = rows.clone();
            shuffled.reverse();
            let n = shuffled.len();
            shuffled.rotate_left(rot % n);
            let b = trace(shuffled, vec![0.5; 3], 0.0);
            prop_assert!((variation(&a) - variation(&b)).abs() <= 1e-9);
        }

        #[test]
        fn regret_accounting_identity(
            rows in proptest::collection::vec((proptest::collection::vec(0.0f64..=1.0, 3), proptest::collection::vec(0.01f64..1.0, 3)), 1..40),
            mean in proptest::collection::vec(0.0f64..=1.0, 3),
            c0 in 0.0f64..=1.0,
        ) {
            prop_assume!(mean.iter().any(|&c| c >= c0));
            let tr = trace(rows.iter().map(|(r, _)| r.clone()).collect(), mean, c0);
            let recs: Vec<_> = rows.iter().enumerate().map(|(t, (_, w))| {
                let s: f64 = w.iter().sum();
                record(t, w.iter().map(|x| x / s).collect(), Some(0))
            }).collect();
            let total = regret(&recs, &tr).unwrap() + expected_reward(&recs, &tr).unwrap();
            let value = comparator(&tr).unwrap().value;
            prop_assert!((total - value).abs() <= 1e-9 * value.abs().max(1.0));
            prop_assert!(violation(&recs, tr.model()) >= 0.0);
        }
    }
}
