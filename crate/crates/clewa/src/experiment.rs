//! Replicated (learner x horizon x replicate) grids.
//!
//! Every run regenerates its own trace from a derived seed, so runs share no
//! mutable state and can execute in any order on any number of threads.
//! Results are sorted before anything is written.

use std::path::Path;
use std::time::Instant;

use clewa_core::metrics::RunResult;
use clewa_core::rng::{derive_seed, label_hash, stream_rng, Stream};
use clewa_core::{generate, make_learner, play, LearnerKind};
use rayon::prelude::*;

use crate::config::{EnvironmentSpec, ExperimentConfig, LearnerSpec};
use crate::csvio;
use crate::error::{io_err, HarnessError, Result};

/// One row of `runs.csv` plus the invariant extremes observed in the run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRow {
    pub learner: String,
    pub kind: LearnerKind,
    pub horizon: usize,
    pub replicate: usize,
    /// Seed of the environment trace.
    pub seed: u64,
    pub regret: f64,
    pub realized_regret: f64,
    pub violation: f64,
    pub variation: f64,
    pub max_lambda: f64,
    pub lambda_cap: f64,
    pub min_prob: f64,
    pub exploration_floor: f64,
    pub wall_ms: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub learner: String,
    pub kind: LearnerKind,
    pub horizon: usize,
    pub replicates: usize,
    pub regret_mean: f64,
    pub regret_std: f64,
    pub realized_regret_mean: f64,
    pub realized_regret_std: f64,
    pub violation_mean: f64,
    pub violation_std: f64,
    /// `3 sqrt(T ln K)`.
    pub regret_bound: f64,
    /// Fraction of replicates whose regret is within `regret_bound`.
    pub bound_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub runs: Vec<RunRow>,
    pub summary: Vec<SummaryRow>,
}

impl ExperimentOutput {
    pub fn runs_csv(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        csvio::write_runs(&mut buf, &self.runs).expect("writing to memory");
        buf
    }

    pub fn summary_csv(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        csvio::write_summary(&mut buf, &self.summary).expect("writing to memory");
        buf
    }

    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        for (name, bytes) in [("runs.csv", self.runs_csv()), ("summary.csv", self.summary_csv())] {
            let path = dir.join(name);
            std::fs::write(&path, bytes).map_err(io_err(path))?;
        }
        Ok(())
    }
}

/// Seed of the trace for horizon `T` and replicate `r`. Learners share traces.
pub fn environment_seed(master_seed: u64, horizon: usize, replicate: usize) -> u64 {
    derive_seed(&[master_seed, horizon as u64, replicate as u64])
}

/// Seed of the learner's sampling stream on a given trace.
pub fn learner_seed(environment_seed: u64, label: &str) -> u64 {
    derive_seed(&[environment_seed, label_hash(label)])
}

/// Runs one learner over one freshly generated trace.
pub fn run_single(
    spec: &LearnerSpec,
    env: &EnvironmentSpec,
    horizon: usize,
    replicate: usize,
    master_seed: u64,
    record_timing: bool,
) -> Result<RunRow> {
    let start = record_timing.then(Instant::now);
    let seed = environment_seed(master_seed, horizon, replicate);
    let trace = generate(&env.process, &env.model, horizon, seed)?;
    let k = env.model.num_actions();
    let mut learner = make_learner(spec.kind, k, horizon, env.model.threshold(), &spec.overrides)?;
    let mut rng = stream_rng(learner_seed(seed, &spec.label), Stream::Learner);
    let out = play(&mut learner, &trace, &mut rng)?;
    let (max_lambda, lambda_cap, min_prob, exploration_floor) =
        (out.max_lambda, out.lambda_cap, out.min_prob, out.exploration_floor);
    let result = RunResult::evaluate(out.records, &trace)?;
    Ok(RunRow {
        learner: spec.label.clone(),
        kind: spec.kind,
        horizon,
        replicate,
        seed,
        regret: result.regret,
        realized_regret: result.realized_regret,
        violation: result.violation,
        variation: result.variation,
        max_lambda,
        lambda_cap,
        min_prob,
        exploration_floor,
        wall_ms: start.map_or(0, |s| s.elapsed().as_millis() as u64),
    })
}

/// Runs the whole grid without touching the filesystem.
///
/// `jobs` caps the worker threads; `None` uses the global rayon pool.
pub fn execute(config: &ExperimentConfig, jobs: Option<usize>) -> Result<ExperimentOutput> {
    config.validate()?;
    let mut tasks = Vec::new();
    for spec in &config.learners {
        for &horizon in &config.horizons {
            for replicate in 0..config.replicates {
                tasks.push((spec, horizon, replicate));
            }
        }
    }
    let work = || {
        tasks
            .par_iter()
            .map(|&(spec, horizon, replicate)| {
                run_single(spec, &config.environment, horizon, replicate, config.master_seed, config.record_timing)
            })
            .collect::<Result<Vec<_>>>()
    };
    let mut runs = match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    };
    runs.sort_by(|a, b| (&a.learner, a.horizon, a.replicate).cmp(&(&b.learner, b.horizon, b.replicate)));
    let summary = summarize(&runs, config.num_actions());
    Ok(ExperimentOutput { runs, summary })
}

/// Runs the grid and writes `runs.csv` and `summary.csv` to `config.output_dir`.
pub fn run_experiment(config: &ExperimentConfig, jobs: Option<usize>) -> Result<Vec<SummaryRow>> {
    let output = execute(config, jobs)?;
    output.write_to(&config.output_dir)?;
    Ok(output.summary)
}

/// Aggregates sorted runs into one row per (learner, T).
pub fn summarize(runs: &[RunRow], num_actions: usize) -> Vec<SummaryRow> {
    let mut out: Vec<SummaryRow> = Vec::new();
    for group in runs.chunk_by(|a, b| a.learner == b.learner && a.horizon == b.horizon) {
        let first = &group[0];
        let t = first.horizon as f64;
        let bound = 3.0 * (t * (num_actions as f64).ln()).sqrt();
        let (regret_mean, regret_std) = mean_std(group.iter().map(|r| r.regret));
        let (realized_regret_mean, realized_regret_std) = mean_std(group.iter().map(|r| r.realized_regret));
        let (violation_mean, violation_std) = mean_std(group.iter().map(|r| r.violation));
        let within = group.iter().filter(|r| r.regret <= bound).count();
        out.push(SummaryRow {
            learner: first.learner.clone(),
            kind: first.kind,
            horizon: first.horizon,
            replicates: group.len(),
            regret_mean,
            regret_std,
            realized_regret_mean,
            realized_regret_std,
            violation_mean,
            violation_std,
            regret_bound: bound,
            bound_fraction: within as f64 / group.len() as f64,
        });
    }
    out
}

/// Mean and sample standard deviation (zero for a single value).
fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    if n < 2.0 {
        return (mean, 0.0);
    }
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
