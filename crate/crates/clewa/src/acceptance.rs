//! The built-in acceptance suite.
//!
//! The simulation grids are run once by [`Grids::run`] and shared by the
//! criteria that inspect them. Each criterion returns a [`CriterionOutcome`]
//! whose `Display` is a single PASS/FAIL line.

use std::collections::BTreeMap;
use std::fmt;

use clewa_core::rng::{derive_seed, stream_rng, Stream};
use clewa_core::{
    best_fixed, best_fixed_grid, fit_exponent, generate, h_curve, make_learner, play, ActionDistribution, ConstraintModel,
    ImportanceEstimate, LearnerKind, ParamOverrides, RewardProcess,
};
use rand::Rng;

use crate::config::{EnvironmentSpec, ExperimentConfig, LearnerSpec};
use crate::error::Result;
use crate::experiment::{execute, ExperimentOutput, RunRow, SummaryRow};
use crate::report::fit_and_report;

pub const ACCEPTANCE_SEED: u64 = 20_120_626;

const FULL_INFO_HORIZONS: std::ops::RangeInclusive<u32> = 10..=17;
const BANDIT_HORIZONS: std::ops::RangeInclusive<u32> = 12..=18;
const GRID_REPLICATES: usize = 20;
const HIGH_PROB_HORIZON: usize = 1 << 14;
const HIGH_PROB_REPLICATES: usize = 50;
pub const HIGH_PROB_EPSILON: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionOutcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{verdict}] {:>2} {}: {}", self.id, self.name, self.detail)
    }
}

fn outcome(id: u8, name: &'static str, passed: bool, detail: String) -> CriterionOutcome {
    CriterionOutcome { id, name, passed, detail }
}

fn linspace(a: f64, b: f64, k: usize) -> Vec<f64> {
    (0..k).map(|i| a + (b - a) * i as f64 / (k - 1) as f64).collect()
}

fn powers_of_two(range: std::ops::RangeInclusive<u32>) -> Vec<usize> {
    range.map(|e| 1usize << e).collect()
}

/// Rewards decrease while constraint means increase, so the threshold binds.
fn binding_environment(k: usize, process: impl FnOnce(Vec<f64>) -> RewardProcess) -> EnvironmentSpec {
    EnvironmentSpec {
        process: process(linspace(0.9, 0.1, k)),
        model: ConstraintModel::new(linspace(0.1, 0.9, k), 0.5).expect("valid model"),
    }
}

fn config(label: &str, kind: LearnerKind, env: EnvironmentSpec, horizons: Vec<usize>, replicates: usize, seed: u64) -> ExperimentConfig {
    let mut spec = LearnerSpec::new(label, kind);
    if matches!(kind, LearnerKind::HpLewa | LearnerKind::HpBanditLewa) {
        spec.overrides.epsilon = Some(HIGH_PROB_EPSILON);
    }
    ExperimentConfig {
        learners: vec![spec],
        environment: env,
        horizons,
        replicates,
        master_seed: seed,
        output_dir: "acceptance".into(),
        record_timing: false,
    }
}

/// LEWA, K=10, i.i.d. Bernoulli rewards, binding constraint (criteria 1 and 2).
pub fn lewa_grid(seed: u64) -> ExperimentConfig {
    let env = binding_environment(10, |means| RewardProcess::IidBernoulli { means });
    config("lewa", LearnerKind::Lewa, env, powers_of_two(FULL_INFO_HORIZONS), GRID_REPLICATES, seed)
}

/// Same as [`lewa_grid`] but with constant rewards (criterion 10).
pub fn low_variation_grid(seed: u64) -> ExperimentConfig {
    let env = binding_environment(10, |base| RewardProcess::LowVariation { base, amplitude: 0.0 });
    config("lewa-lowvar", LearnerKind::Lewa, env, powers_of_two(FULL_INFO_HORIZONS), GRID_REPLICATES, seed)
}

/// BanditLEWA, K=5 (criterion 8).
pub fn bandit_grid(seed: u64) -> ExperimentConfig {
    let env = binding_environment(5, |means| RewardProcess::IidBernoulli { means });
    config("bandit-lewa", LearnerKind::BanditLewa, env, powers_of_two(BANDIT_HORIZONS), GRID_REPLICATES, seed)
}

/// Reward and constraint means share an ordering and `c0` only binds early,
/// so regret is positive and its spread is meaningful (criterion 9).
fn aligned_environment(k: usize) -> EnvironmentSpec {
    EnvironmentSpec {
        process: RewardProcess::IidBernoulli { means: linspace(0.9, 0.1, k) },
        model: ConstraintModel::new(linspace(0.9, 0.1, k), 0.85).expect("valid model"),
    }
}

pub fn high_prob_grids(seed: u64) -> [ExperimentConfig; 2] {
    let t = vec![HIGH_PROB_HORIZON];
    [
        config("hp-lewa", LearnerKind::HpLewa, aligned_environment(10), t.clone(), HIGH_PROB_REPLICATES, seed),
        config("hp-bandit-lewa", LearnerKind::HpBanditLewa, aligned_environment(5), t, HIGH_PROB_REPLICATES, seed),
    ]
}

/// Supplementary: LEWA where reward gaps are small next to constraint gaps,
/// so the learner cannot buy much reward with violation and regret is positive.
pub fn weakly_binding_grid(seed: u64) -> ExperimentConfig {
    let env = EnvironmentSpec {
        process: RewardProcess::IidBernoulli { means: linspace(0.6, 0.5, 10) },
        model: ConstraintModel::new(linspace(0.1, 0.9, 10), 0.5).expect("valid model"),
    };
    config("lewa-weak", LearnerKind::Lewa, env, powers_of_two(FULL_INFO_HORIZONS), GRID_REPLICATES, seed)
}

/// Outputs of every simulated grid of the suite.
#[derive(Debug, Clone)]
pub struct Grids {
    pub lewa: ExperimentOutput,
    pub low_variation: ExperimentOutput,
    pub bandit: ExperimentOutput,
    pub hp_lewa: ExperimentOutput,
    pub hp_bandit: ExperimentOutput,
    pub weakly_binding: ExperimentOutput,
}

impl Grids {
    pub fn configs(seed: u64) -> Vec<ExperimentConfig> {
        let [hp, hpb] = high_prob_grids(seed);
        vec![lewa_grid(seed), low_variation_grid(seed), bandit_grid(seed), hp, hpb, weakly_binding_grid(seed)]
    }

    pub fn run(seed: u64, jobs: Option<usize>) -> Result<Self> {
        let mut outs = Grids::configs(seed).iter().map(|c| execute(c, jobs)).collect::<Result<Vec<_>>>()?.into_iter();
        let mut next = || outs.next().expect("six grids");
        Ok(Self {
            lewa: next(),
            low_variation: next(),
            bandit: next(),
            hp_lewa: next(),
            hp_bandit: next(),
            weakly_binding: next(),
        })
    }

    pub fn all(&self) -> [(&'static str, &ExperimentOutput); 6] {
        [
            ("lewa", &self.lewa),
            ("lewa-lowvar", &self.low_variation),
            ("bandit-lewa", &self.bandit),
            ("hp-lewa", &self.hp_lewa),
            ("hp-bandit-lewa", &self.hp_bandit),
            ("lewa-weak", &self.weakly_binding),
        ]
    }

    fn runs(&self) -> impl Iterator<Item = &RunRow> {
        self.all().into_iter().flat_map(|(_, g)| g.runs.iter())
    }

    /// Every CSV the suite produces, concatenated with separators.
    pub fn csv_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for (name, grid) in self.all() {
            out.extend_from_slice(format!("## {name}/runs.csv\n").as_bytes());
            out.extend(grid.runs_csv());
            out.extend_from_slice(format!("## {name}/summary.csv\n").as_bytes());
            out.extend(grid.summary_csv());
        }
        out
    }
}

fn slope(summary: &[SummaryRow], metric: impl Fn(&SummaryRow) -> f64) -> Result<f64> {
    let points: Vec<(f64, f64)> = summary.iter().map(|r| (r.horizon as f64, metric(r))).collect();
    Ok(fit_exponent(&points)?)
}

/// 1. Mean LEWA regret at most `3 sqrt(T ln K)` at every horizon.
pub fn regret_bound(grids: &Grids) -> CriterionOutcome {
    let worst = grids
        .lewa
        .summary
        .iter()
        .map(|r| (r.regret_mean / r.regret_bound, r))
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .expect("non-empty grid");
    let passed = grids.lewa.summary.iter().all(|r| r.regret_mean <= r.regret_bound);
    let detail = format!(
        "worst mean regret / 3 sqrt(T ln K) = {:.3} at T={} (mean {:.2}, bound {:.2})",
        worst.0, worst.1.horizon, worst.1.regret_mean, worst.1.regret_bound
    );
    outcome(1, "LEWA regret bound", passed, detail)
}

/// 2. LEWA violation slope at most 0.85 and violation at the largest T at most `5 T^0.75`.
pub fn violation_bound(grids: &Grids) -> Result<CriterionOutcome> {
    let s = slope(&grids.lewa.summary, |r| r.violation_mean)?;
    let last = grids.lewa.summary.last().expect("non-empty grid");
    let cap = 5.0 * (last.horizon as f64).powf(0.75);
    let passed = s <= 0.85 && last.violation_mean <= cap;
    let detail = format!("slope {s:.3} (<= 0.85), violation {:.1} at T={} (<= {cap:.1})", last.violation_mean, last.horizon);
    Ok(outcome(2, "LEWA violation bound", passed, detail))
}

fn max_prob_gap(a: &[clewa_core::RoundRecord], b: &[clewa_core::RoundRecord]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.distribution.probs().iter().zip(y.distribution.probs()).map(|(p, q)| (p - q).abs()))
        .fold(0.0, f64::max)
}

/// 3. With `c0 = 0`, LEWA tracks EWA and BanditLEWA tracks Exp3 within 1e-12.
pub fn reductions(seed: u64) -> Result<CriterionOutcome> {
    let horizon = 10_000;
    let k = 5;
    let process = RewardProcess::IidBernoulli { means: linspace(0.9, 0.1, k) };
    let model = ConstraintModel::new(linspace(0.1, 0.9, k), 0.0)?;
    let trace = generate(&process, &model, horizon, derive_seed(&[seed, 3]))?;
    let pair = |a: LearnerKind, b: LearnerKind, ov: ParamOverrides| -> Result<(f64, bool, f64)> {
        let learner_seed = derive_seed(&[seed, 3, 1]);
        let mut la = make_learner(a, k, horizon, 0.0, &ov)?;
        let mut lb = make_learner(b, k, horizon, 0.0, &ov)?;
        let ra = play(&mut la, &trace, &mut stream_rng(learner_seed, Stream::Learner))?;
        let rb = play(&mut lb, &trace, &mut stream_rng(learner_seed, Stream::Learner))?;
        let same_actions = ra.records.iter().zip(&rb.records).all(|(x, y)| x.sampled_action == y.sampled_action);
        Ok((max_prob_gap(&ra.records, &rb.records), same_actions, ra.max_lambda))
    };
    let eta = clewa_core::learner::lewa_eta(k, horizon);
    let (full_gap, _, full_lambda) = pair(LearnerKind::Lewa, LearnerKind::Ewa, ParamOverrides { eta: Some(eta), ..Default::default() })?;
    let gamma = 0.05;
    let ov = ParamOverrides { gamma: Some(gamma), eta: Some(gamma / k as f64 / 4.0), delta: Some(0.5), ..Default::default() };
    let (bandit_gap, same_actions, bandit_lambda) = pair(LearnerKind::BanditLewa, LearnerKind::Exp3, ov)?;
    let passed = full_gap <= 1e-12 && bandit_gap <= 1e-12 && same_actions && full_lambda == 0.0 && bandit_lambda == 0.0;
    let detail = format!("max |p - p'|: LEWA/EWA {full_gap:.1e}, BanditLEWA/Exp3 {bandit_gap:.1e} over T={horizon}");
    Ok(outcome(3, "EWA/Exp3 reduction", passed, detail))
}

/// 4. Recorded `lambda` never exceeds the analytic cap, compared exactly.
pub fn dual_cap(grids: &Grids) -> CriterionOutcome {
    let constrained: Vec<&RunRow> = grids.runs().filter(|r| r.kind.is_constrained()).collect();
    let breaches = constrained.iter().filter(|r| r.max_lambda > r.lambda_cap).count();
    let mut kinds: Vec<&str> = constrained.iter().map(|r| r.kind.name()).collect();
    kinds.sort_unstable();
    kinds.dedup();
    let worst = constrained.iter().map(|r| r.max_lambda / r.lambda_cap).fold(0.0, f64::max);
    let detail = format!(
        "{breaches} breaches over {} runs of {}; largest lambda/cap {worst:.4}",
        constrained.len(),
        kinds.join(", ")
    );
    outcome(4, "dual cap", breaches == 0, detail)
}

/// 5. Vertex-enumeration oracle against a brute-force grid, plus shape of `h`.
pub fn oracle_equivalence(seed: u64) -> Result<CriterionOutcome> {
    const STEP: f64 = 0.001;
    let mut rng = stream_rng(derive_seed(&[seed, 5]), Stream::Learner);
    let mut worst_gap_ratio: f64 = 0.0;
    let mut failures = 0usize;
    for n in 0..1000 {
        let k = 2 + n % 2;
        let rewards: Vec<f64> = (0..k).map(|_| rng.random::<f64>()).collect();
        let constraint: Vec<f64> = (0..k).map(|_| rng.random::<f64>()).collect();
        let max_c = constraint.iter().cloned().fold(f64::MIN, f64::max);
        let c0 = rng.random::<f64>() * max_c;
        let exact = best_fixed(&rewards, &constraint, c0)?;
        let grid = best_fixed_grid(&rewards, &constraint, c0, STEP)?;
        let r_inf = rewards.iter().cloned().fold(0.0, f64::max);
        let gap = exact.value - grid.value;
        worst_gap_ratio = worst_gap_ratio.max(gap / (STEP * r_inf));
        let slacks: Vec<f64> = (0..=10).map(|i| c0 * i as f64 / 10.0).collect();
        let h = h_curve(&rewards, &constraint, c0, &slacks)?;
        let monotone = h.windows(2).all(|w| w[1] >= w[0] - 1e-9);
        let concave = h.windows(3).all(|w| w[1] >= 0.5 * (w[0] + w[2]) - 1e-9);
        if !(exact.value >= grid.value && gap <= STEP * r_inf && monotone && concave) {
            failures += 1;
        }
    }
    let detail = format!("{failures} failing instances of 1000; largest gap / (step |R|_inf) = {worst_gap_ratio:.3}");
    Ok(outcome(5, "oracle equivalence", failures == 0, detail))
}

/// 6. `E_{a ~ p}[estimate]` equals the true vector, computed exactly over `a`.
pub fn estimator_unbiasedness(seed: u64) -> Result<CriterionOutcome> {
    let mut rng = stream_rng(derive_seed(&[seed, 6]), Stream::Learner);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let k = rng.random_range(2..=8);
        let gamma = rng.random_range(0.01..=1.0);
        let raw: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 1e-3).collect();
        let total: f64 = raw.iter().sum();
        let dist = ActionDistribution::new(raw.iter().map(|w| w / total).collect())?.mix_uniform(gamma);
        let reward: Vec<f64> = (0..k).map(|_| rng.random::<f64>()).collect();
        let constraint: Vec<f64> = (0..k).map(|_| rng.random::<f64>()).collect();
        for truth in [&reward, &constraint] {
            let mut expectation = vec![0.0; k];
            for (a, &p) in dist.probs().iter().enumerate() {
                let est = ImportanceEstimate::new(k, a, truth[a], p)?;
                for (e, v) in expectation.iter_mut().zip(est.values()) {
                    *e += p * v;
                }
            }
            let err = expectation.iter().zip(truth.iter()).map(|(e, t)| (e - t).abs()).fold(0.0, f64::max);
            worst = worst.max(err);
        }
    }
    Ok(outcome(6, "estimator unbiasedness", worst <= 1e-12, format!("max |E[estimate] - truth| = {worst:.1e} over 100 triples")))
}

/// 7. Every played bandit distribution keeps `gamma / K` on each action.
pub fn exploration_floor(grids: &Grids) -> CriterionOutcome {
    let bandit: Vec<&RunRow> = grids.runs().filter(|r| r.kind.is_bandit()).collect();
    let breaches = bandit.iter().filter(|r| r.min_prob < r.exploration_floor - 1e-12).count();
    let tightest = bandit.iter().map(|r| r.min_prob / r.exploration_floor).fold(f64::INFINITY, f64::min);
    let detail = format!("{breaches} breaches over {} bandit runs; smallest min p / (gamma/K) = {tightest:.4}", bandit.len());
    outcome(7, "exploration floor", breaches == 0 && !bandit.is_empty(), detail)
}

/// 8. BanditLEWA realized regret and violation slopes at most 0.9.
pub fn bandit_bounds(grids: &Grids) -> Result<CriterionOutcome> {
    let regret = slope(&grids.bandit.summary, |r| r.realized_regret_mean)?;
    let violation = slope(&grids.bandit.summary, |r| r.violation_mean)?;
    let first = grids.bandit.summary.first().expect("non-empty grid");
    let last = grids.bandit.summary.last().expect("non-empty grid");
    let detail = format!(
        "realized regret slope {regret:.3}, violation slope {violation:.3} (<= 0.9); violation {:.1} -> {:.1}",
        first.violation_mean, last.violation_mean
    );
    Ok(outcome(8, "bandit bounds", regret <= 0.9 && violation <= 0.9, detail))
}

/// 9. At most 10% of high-probability runs exceed three times the mean regret.
pub fn high_probability(grids: &Grids) -> CriterionOutcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for grid in [&grids.hp_lewa, &grids.hp_bandit] {
        let runs = &grid.runs;
        let mean = runs.iter().map(|r| r.regret).sum::<f64>() / runs.len() as f64;
        let frac = runs.iter().filter(|r| r.regret > 3.0 * mean).count() as f64 / runs.len() as f64;
        passed &= mean > 0.0 && frac <= 0.1;
        parts.push(format!("{} mean {mean:.1} frac {frac:.2}", runs[0].learner));
    }
    let detail = format!("{} (eps={HIGH_PROB_EPSILON}, T={HIGH_PROB_HORIZON}, {HIGH_PROB_REPLICATES} reps)", parts.join("; "));
    outcome(9, "high-probability concentration", passed, detail)
}

/// 10. Constant rewards give a violation slope at most 0.6 and below criterion 2's.
pub fn variation_property(grids: &Grids) -> Result<CriterionOutcome> {
    let flat = slope(&grids.low_variation.summary, |r| r.violation_mean)?;
    let generic = slope(&grids.lewa.summary, |r| r.violation_mean)?;
    let detail = format!("violation slope {flat:.3} with zero variation vs {generic:.3} i.i.d. (<= 0.6 and strictly lower)");
    Ok(outcome(10, "variation property", flat <= 0.6 && flat < generic, detail))
}

/// 11. A second pass with a different thread count reproduces every CSV byte.
pub fn determinism(grids: &Grids, seed: u64, rerun_jobs: Option<usize>) -> Result<CriterionOutcome> {
    let first = grids.csv_bytes();
    let second = Grids::run(seed, rerun_jobs)?.csv_bytes();
    let detail = format!("{} CSV bytes, rerun jobs={:?}, identical={}", first.len(), rerun_jobs, first == second);
    Ok(outcome(11, "determinism", first == second, detail))
}

/// Supplementary: LEWA regret slope on [`weakly_binding_grid`] lies in `[0.3, 0.75]`.
pub fn regret_slope(grids: &Grids) -> Result<CriterionOutcome> {
    let mut thresholds = BTreeMap::new();
    thresholds.insert("lewa-weak".to_string(), Default::default());
    let rows = fit_and_report(&grids.weakly_binding.summary, &thresholds)?;
    let s = rows.iter().find(|r| r.metric == crate::report::Metric::Regret).expect("regret row").slope;
    Ok(outcome(0, "LEWA regret slope (supplementary)", (0.3..=0.75).contains(&s), format!("slope {s:.3} in [0.3, 0.75]")))
}

/// Runs every criterion. `rerun_jobs` is the thread count of the determinism pass.
pub fn run_all(seed: u64, jobs: Option<usize>, rerun_jobs: Option<usize>) -> Result<(Grids, Vec<CriterionOutcome>)> {
    let grids = Grids::run(seed, jobs)?;
    let outcomes = vec![
        regret_bound(&grids),
        violation_bound(&grids)?,
        reductions(seed)?,
        dual_cap(&grids),
        oracle_equivalence(seed)?,
        estimator_unbiasedness(seed)?,
        exploration_floor(&grids),
        bandit_bounds(&grids)?,
        high_probability(&grids),
        variation_property(&grids)?,
        determinism(&grids, seed, rerun_jobs)?,
        regret_slope(&grids)?,
    ];
    Ok((grids, outcomes))
}
