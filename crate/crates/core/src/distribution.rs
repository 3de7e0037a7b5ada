//! Probability vectors over the action set and the log-domain weights that
//! induce them.

use alloc::vec::Vec;

use rand::{Rng, RngCore};

use crate::error::{Error, Result};

/// Absolute tolerance on `sum(p) == 1`.
pub const SIMPLEX_TOLERANCE: f64 = 1e-9;

/// A probability vector over `K >= 1` actions.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionDistribution {
    probs: Vec<f64>,
}

impl ActionDistribution {
    /// Validates `probs`: non-empty, finite, non-negative, summing to one
    /// within [`SIMPLEX_TOLERANCE`].
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty probability vector".into()));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidDistribution(alloc::format!("entry {p} is negative or non-finite")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
            return Err(Error::InvalidDistribution(alloc::format!("entries sum to {sum}")));
        }
        Ok(Self { probs })
    }

    pub fn uniform(num_actions: usize) -> Self {
        assert!(num_actions > 0, "distribution needs at least one action");
        Self { probs: alloc::vec![1.0 / num_actions as f64; num_actions] }
    }

    /// The unit vector `e_index`.
    pub fn vertex(num_actions: usize, index: usize) -> Self {
        assert!(index < num_actions, "vertex index out of range");
        let mut probs = alloc::vec![0.0; num_actions];
        probs[index] = 1.0;
        Self { probs }
    }

    /// Skips validation; callers guarantee the simplex invariants.
    pub(crate) fn from_raw(probs: Vec<f64>) -> Self {
        debug_assert!(Self::new(probs.clone()).is_ok(), "from_raw given an invalid distribution");
        Self { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn into_probs(self) -> Vec<f64> {
        self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// `p^T v`. Panics if the lengths differ.
    pub fn dot(&self, v: &[f64]) -> f64 {
        assert_eq!(v.len(), self.probs.len(), "dot product length mismatch");
        self.probs.iter().zip(v).map(|(p, x)| p * x).sum()
    }

    pub fn min_prob(&self) -> f64 {
        self.probs.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `(1 - gamma) * self + gamma / K`.
    pub fn mix_uniform(&self, gamma: f64) -> Self {
        let floor = gamma / self.probs.len() as f64;
        Self::from_raw(self.probs.iter().map(|q| (1.0 - gamma) * q + floor).collect())
    }
}

/// Weights `w` stored as `ln w`, so the multiplicative update becomes an
/// addition and long horizons cannot overflow.
#[derive(Debug, Clone, PartialEq)]
pub struct LogWeightVector {
    log_w: Vec<f64>,
}

impl LogWeightVector {
    pub fn new(log_w: Vec<f64>) -> Result<Self> {
        if log_w.is_empty() {
            return Err(Error::InvalidDistribution("empty weight vector".into()));
        }
        if log_w.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidDistribution("log-weights must be finite".into()));
        }
        Ok(Self { log_w })
    }

    /// All weights equal to `exp(level)`.
    pub fn constant(num_actions: usize, level: f64) -> Self {
        assert!(num_actions > 0 && level.is_finite());
        Self { log_w: alloc::vec![level; num_actions] }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.log_w
    }

    pub fn len(&self) -> usize {
        self.log_w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_w.is_empty()
    }

    /// `w <- w ∘ exp(scale * g)`.
    pub fn add_scaled(&mut self, scale: f64, gain: &[f64]) {
        assert_eq!(gain.len(), self.log_w.len());
        for (lw, g) in self.log_w.iter_mut().zip(gain) {
            *lw += scale * g;
        }
        debug_assert!(self.log_w.iter().all(|x| x.is_finite()), "log-weights overflowed");
    }

    /// Subtracts the max entry. The induced distribution is unchanged.
    pub fn recenter(&mut self) {
        let max = self.max();
        for lw in &mut self.log_w {
            *lw -= max;
        }
    }

    fn max(&self) -> f64 {
        self.log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `p_i = w_i / sum_j w_j`, computed with a max-shift so that any finite
/// log-weights are safe.
pub fn normalize(log_w: &LogWeightVector) -> ActionDistribution {
    let max = log_w.max();
    let mut probs: Vec<f64> = log_w.log_w.iter().map(|x| libm::exp(x - max)).collect();
    // The max entry contributes exp(0) = 1, so the sum is in [1, K].
    let total: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= total;
    }
    ActionDistribution::from_raw(probs)
}

/// Inverse-CDF sampling with one uniform draw. Never returns an index whose
/// probability is zero.
pub fn sample<R: RngCore + ?Sized>(dist: &ActionDistribution, rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut cumulative = 0.0;
    let mut last_positive = 0;
    for (i, &p) in dist.probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        cumulative += p;
        last_positive = i;
        if u < cumulative {
            return i;
        }
    }
    // u landed in the rounding gap above the accumulated sum.
    last_positive
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn normalize_examples() {
        let d = normalize(&LogWeightVector::new(alloc::vec![0.0, 0.0, 0.0]).unwrap());
        assert!(close(d.probs(), &[1.0 / 3.0; 3], 1e-15));

        let d = normalize(&LogWeightVector::new(alloc::vec![libm::log(3.0), 0.0]).unwrap());
        assert!(close(d.probs(), &[0.75, 0.25], 1e-15));

        let d = normalize(&LogWeightVector::new(alloc::vec![1000.0, 1000.0 + libm::log(2.0)]).unwrap());
        assert!(close(d.probs(), &[1.0 / 3.0, 2.0 / 3.0], 1e-12));
    }

    #[test]
    fn rejects_bad_distributions() {
        assert!(ActionDistribution::new(alloc::vec![]).is_err());
        assert!(ActionDistribution::new(alloc::vec![0.5, 0.6]).is_err());
        assert!(ActionDistribution::new(alloc::vec![1.5, -0.5]).is_err());
        assert!(ActionDistribution::new(alloc::vec![f64::NAN, 1.0]).is_err());
        assert!(ActionDistribution::new(alloc::vec![0.5, 0.5 + 5e-10]).is_ok());
        assert!(LogWeightVector::new(alloc::vec![0.0, f64::INFINITY]).is_err());
    }

    #[test]
    fn degenerate_sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let first = ActionDistribution::new(alloc::vec![1.0, 0.0, 0.0]).unwrap();
        let last = ActionDistribution::new(alloc::vec![0.0, 1.0]).unwrap();
        for _ in 0..1000 {
            assert_eq!(sample(&first, &mut rng), 0);
            assert_eq!(sample(&last, &mut rng), 1);
        }
    }

    #[test]
    fn fair_coin_frequency() {
        // sd of the frequency is 0.5 / sqrt(1e5) ~ 0.0016, so [0.49, 0.51] is > 6 sd.
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let d = ActionDistribution::uniform(2);
        let n = 100_000;
        let zeros = (0..n).filter(|_| sample(&d, &mut rng) == 0).count();
        let freq = zeros as f64 / n as f64;
        assert!((0.49..=0.51).contains(&freq), "frequency {freq}");
    }

    #[test]
    fn sampling_is_reproducible() {
        let d = ActionDistribution::new(alloc::vec![0.2, 0.3, 0.5]).unwrap();
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..64).map(|_| sample(&d, &mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(draw(11), draw(11));
    }

    #[test]
    fn mixing_puts_floor_on_every_entry() {
        let q = ActionDistribution::vertex(2, 0);
        assert!(close(q.mix_uniform(0.1).probs(), &[0.95, 0.05], 1e-15));
    }

    proptest! {
        #[test]
        fn normalize_is_shift_invariant(
            log_w in proptest::collection::vec(-50.0f64..50.0, 1..12),
            shift in -1e3f64..1e3,
        ) {
            let base = normalize(&LogWeightVector::new(log_w.clone()).unwrap());
            let shifted = normalize(&LogWeightVector::new(log_w.iter().map(|x| x + shift).collect()).unwrap());
            prop_assert!(close(base.probs(), shifted.probs(), 1e-12));
            let sum: f64 = base.probs().iter().sum();
            prop_assert!((sum - 1.0).abs() <= SIMPLEX_TOLERANCE);
        }

        #[test]
        fn sample_skips_zero_mass(
            mask in proptest::collection::vec(any::<bool>(), 2..10),
            seed in any::<u64>(),
        ) {
            prop_assume!(mask.iter().any(|m| *m));
            let support = mask.iter().filter(|m| **m).count() as f64;
            let probs: Vec<f64> = mask.iter().map(|m| if *m { 1.0 / support } else { 0.0 }).collect();
            let d = ActionDistribution::new(probs).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..200 {
                let i = sample(&d, &mut rng);
                prop_assert!(mask[i]);
            }
        }
    }
}
