//! The constrained best-fixed comparator
//! `max { p^T R : p in simplex, p^T c >= c0 }`.
//!
//! With one linear constraint on the simplex every vertex of the feasible
//! polytope is either a unit vector `e_i` with `c_i >= c0`, or the point on
//! the edge `[e_j, e_i]` where `p^T c = c0` for a pair with
//! `c_i >= c0 >= c_j`. Enumerating those `O(K^2)` candidates is exact.

use alloc::vec::Vec;

use crate::distribution::ActionDistribution;
use crate::error::{invalid, Error, Result};

/// Largest action count [`best_fixed_grid`] accepts.
pub const GRID_MAX_ACTIONS: usize = 4;

const FEASIBILITY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ComparatorSolution {
    pub distribution: ActionDistribution,
    /// `distribution^T R`.
    pub value: f64,
    /// Whether `distribution^T c = c0` at the optimum.
    pub active: bool,
}

fn check_instance(rewards: &[f64], constraint: &[f64], c0: f64) -> Result<()> {
    if rewards.is_empty() {
        return Err(invalid("rewards", "need at least one action"));
    }
    if rewards.len() != constraint.len() {
        return Err(Error::DimensionMismatch { expected: rewards.len(), actual: constraint.len() });
    }
    if rewards.iter().chain(constraint).any(|x| !x.is_finite()) || !c0.is_finite() {
        return Err(invalid("rewards", "entries must be finite"));
    }
    let max_mean = constraint.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max_mean < c0 {
        return Err(Error::Infeasible { max_mean, threshold: c0 });
    }
    Ok(())
}

/// Exact maximizer by vertex enumeration.
///
/// Candidates are visited in lexicographic order: for each `i`, the unit
/// vector `e_i` and then the mixtures `(i, j)` for increasing `j`. Only a
/// strictly larger value replaces the incumbent, so ties go to the lowest
/// indices. Pairs with `c_i == c_j` are skipped.
pub fn best_fixed(rewards: &[f64], constraint: &[f64], c0: f64) -> Result<ComparatorSolution> {
    check_instance(rewards, constraint, c0)?;
    let k = rewards.len();
    // (value, first index, second index, weight on first)
    let mut best: Option<(f64, usize, usize, f64)> = None;
    let mut consider = |value: f64, i: usize, j: usize, alpha: f64| {
        if best.is_none_or(|(v, ..)| value > v) {
            best = Some((value, i, j, alpha));
        }
    };

    for i in 0..k {
        if constraint[i] < c0 {
            continue;
        }
        consider(rewards[i], i, i, 1.0);
        for j in 0..k {
            if constraint[j] > c0 || constraint[i] == constraint[j] {
                continue;
            }
            let alpha = (c0 - constraint[j]) / (constraint[i] - constraint[j]);
            consider(alpha * rewards[i] + (1.0 - alpha) * rewards[j], i, j, alpha);
        }
    }

    let (_, i, j, alpha) = best.expect("feasible instance has a feasible unit vector");
    let mut probs = alloc::vec![0.0; k];
    probs[i] += alpha;
    probs[j] += 1.0 - alpha;
    let active = if i == j { constraint[i] == c0 } else { true };
    let distribution = ActionDistribution::from_raw(probs);
    let value = distribution.dot(rewards);
    Ok(ComparatorSolution { distribution, value, active })
}

/// Brute-force maximizer over the simplex grid with spacing `step`.
///
/// `1 / step` must be an integer (within 1e-9). Intended as an independent
/// check of [`best_fixed`] for `K <= 4`.
pub fn best_fixed_grid(rewards: &[f64], constraint: &[f64], c0: f64, step: f64) -> Result<ComparatorSolution> {
    if rewards.len() > GRID_MAX_ACTIONS {
        return Err(Error::GridTooLarge(rewards.len()));
    }
    if !(step > 0.0 && step <= 0.5) {
        return Err(invalid("step", alloc::format!("{step} outside (0, 0.5]")));
    }
    let n = libm::round(1.0 / step);
    if (n * step - 1.0).abs() > 1e-9 {
        return Err(invalid("step", alloc::format!("1 / {step} is not an integer")));
    }
    if rewards.len() != constraint.len() {
        return Err(Error::DimensionMismatch { expected: rewards.len(), actual: constraint.len() });
    }
    let n = n as usize;
    let k = rewards.len();

    let mut counts = alloc::vec![0usize; k];
    let mut best: Option<(f64, Vec<usize>)> = None;
    enumerate_compositions(&mut counts, 0, n, &mut |counts| {
        let (mut value, mut level) = (0.0, 0.0);
        for ((&m, r), c) in counts.iter().zip(rewards).zip(constraint) {
            let p = m as f64 / n as f64;
            value += p * r;
            level += p * c;
        }
        if level >= c0 - FEASIBILITY_SLACK && best.as_ref().is_none_or(|(v, _)| value > *v) {
            best = Some((value, counts.to_vec()));
        }
    });

    let (value, counts) = best.ok_or_else(|| {
        let max_mean = constraint.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Error::Infeasible { max_mean, threshold: c0 }
    })?;
    let probs: Vec<f64> = counts.iter().map(|&m| m as f64 / n as f64).collect();
    let level: f64 = probs.iter().zip(constraint).map(|(p, c)| p * c).sum();
    Ok(ComparatorSolution {
        distribution: ActionDistribution::new(probs)?,
        value,
        active: (level - c0).abs() <= FEASIBILITY_SLACK,
    })
}

/// Visits every `counts` with `sum(counts) == total`, in lexicographic order
/// of decreasing leading entries.
fn enumerate_compositions(counts: &mut [usize], pos: usize, remaining: usize, visit: &mut impl FnMut(&[usize])) {
    if pos + 1 == counts.len() {
        counts[pos] = remaining;
        visit(counts);
        return;
    }
    for m in (0..=remaining).rev() {
        counts[pos] = m;
        enumerate_compositions(counts, pos + 1, remaining - m, visit);
    }
}

/// `h(g) = max { p^T R : c0 - p^T c <= g }` for each slack `g >= 0`.
pub fn h_curve(rewards: &[f64], constraint: &[f64], c0: f64, slacks: &[f64]) -> Result<Vec<f64>> {
    check_instance(rewards, constraint, c0)?;
    slacks
        .iter()
        .map(|&g| {
            if g.is_nan() || g < 0.0 {
                return Err(invalid("gamma", alloc::format!("slack {g} must be non-negative")));
            }
            best_fixed(rewards, constraint, c0 - g).map(|s| s.value)
        })
        .collect()
}

/// Finite-difference slope `(h(eps) - h(0)) / eps`, the empirical stand-in
/// for the sensitivity of the comparator to the threshold.
pub fn h_slope_at_zero(rewards: &[f64], constraint: &[f64], c0: f64, eps: f64) -> Result<f64> {
    let h = h_curve(rewards, constraint, c0, &[0.0, eps])?;
    Ok((h[1] - h[0]) / eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn two_action_mixture() {
        let s = best_fixed(&[10.0, 4.0], &[0.2, 0.8], 0.5).unwrap();
        assert!((s.value - 7.0).abs() < 1e-12);
        assert!((s.distribution.probs()[0] - 0.5).abs() < 1e-12);
        assert!(s.active);
        let g = best_fixed_grid(&[10.0, 4.0], &[0.2, 0.8], 0.5, 0.001).unwrap();
        assert!(s.value - g.value <= 0.001 * 10.0 && g.value <= s.value + 1e-12);
    }

    #[test]
    fn unconstrained_picks_argmax() {
        let s = best_fixed(&[1.0, 2.0, 3.0], &[0.3, 0.9, 0.1], 0.0).unwrap();
        assert_eq!(s.distribution.probs(), &[0.0, 0.0, 1.0]);
        assert_eq!(s.value, 3.0);
        assert!(!s.active);
    }

    #[test]
    fn infeasible_instance() {
        assert!(matches!(best_fixed(&[1.0, 2.0], &[0.1, 0.2], 0.5), Err(Error::Infeasible { .. })));
        assert!(matches!(best_fixed_grid(&[1.0, 2.0], &[0.1, 0.2], 0.5, 0.1), Err(Error::Infeasible { .. })));
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let s = best_fixed(&[1.0, 1.0, 1.0], &[0.5, 0.5, 0.5], 0.2).unwrap();
        assert_eq!(s.distribution.probs(), &[1.0, 0.0, 0.0]);
        let g = best_fixed_grid(&[0.0, 0.0], &[1.0, 0.0], 0.3, 0.1).unwrap();
        assert_eq!(g.value, 0.0);
        assert_eq!(g.distribution.probs(), &[1.0, 0.0]);
    }

    #[test]
    fn coarse_grid_visits_three_points() {
        let mut seen = vec![];
        let mut counts = [0usize; 2];
        enumerate_compositions(&mut counts, 0, 2, &mut |c| seen.push(c.to_vec()));
        assert_eq!(seen, vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        let g = best_fixed_grid(&[1.0, 3.0], &[1.0, 0.0], 0.0, 0.5).unwrap();
        assert_eq!(g.distribution.probs(), &[0.0, 1.0]);
        let g = best_fixed_grid(&[1.0, 3.0], &[1.0, 0.0], 0.4, 0.5).unwrap();
        assert_eq!(g.distribution.probs(), &[0.5, 0.5]);
    }

    #[test]
    fn grid_guards() {
        assert!(matches!(best_fixed_grid(&[0.0; 5], &[1.0; 5], 0.5, 0.1), Err(Error::GridTooLarge(5))));
        assert!(best_fixed_grid(&[0.0; 2], &[1.0; 2], 0.5, 0.6).is_err());
        assert!(best_fixed_grid(&[0.0; 2], &[1.0; 2], 0.5, 0.3).is_err());
        assert!(best_fixed_grid(&[0.0; 2], &[1.0; 2], 0.5, 0.0).is_err());
    }

    #[test]
    fn degenerate_equal_constraints_are_skipped() {
        let s = best_fixed(&[5.0, 1.0, 9.0], &[0.6, 0.6, 0.1], 0.6).unwrap();
        // only e_0, e_1 and mixtures of {0,1} with 2 are vertices; (0, 2) at alpha = 1 is e_0
        assert_eq!(s.value, 5.0);
        assert!(s.active);
    }

    #[test]
    fn h_curve_examples() {
        let (r, c) = ([10.0, 4.0], [0.2, 0.8]);
        let h = h_curve(&r, &c, 0.5, &[0.0, 0.1, 0.3, 0.5, 0.9]).unwrap();
        assert!((h[0] - 7.0).abs() < 1e-12);
        assert_eq!(h[3], 10.0);
        assert_eq!(h[4], 10.0);
        assert!(h.windows(2).all(|w| w[1] >= w[0]));
        // slope: p_0 = (0.8 - c0 + g) / 0.6, so dh/dg = 6 / 0.6 = 10
        assert!((h_slope_at_zero(&r, &c, 0.5, 1e-3).unwrap() - 10.0).abs() < 1e-6);
        assert!(h_curve(&r, &c, 0.5, &[-0.1]).is_err());
    }
}
