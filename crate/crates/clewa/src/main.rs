use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use clewa::acceptance::{self, ACCEPTANCE_SEED};
use clewa::config::{resolve_seed, SEED_ENV_VAR};
use clewa::experiment::{environment_seed, execute, learner_seed};
use clewa::report::{format_exponents, format_summary};
use clewa::{csvio, fit_and_report, ExperimentConfig};
use clewa_core::metrics::RunResult;
use clewa_core::oracle::h_slope_at_zero;
use clewa_core::rng::{stream_rng, Stream};
use clewa_core::{best_fixed, generate, make_learner, play, LearnerKind, ParamOverrides};

#[derive(Parser)]
#[command(name = "clewa", version, about = "Constrained exponentially weighted learners: experiments and checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a replicated experiment grid from a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `output_dir` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Master seed; overrides CLEWA_SEED and the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
        /// Record per-run wall time in runs.csv (makes the file non-reproducible).
        #[arg(long)]
        timing: bool,
    },
    /// Run the built-in acceptance suite.
    Accept {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        jobs: Option<usize>,
        /// Thread count of the determinism rerun.
        #[arg(long, default_value_t = 1)]
        rerun_jobs: usize,
        /// Also write every grid's CSVs under this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the best fixed feasible distribution for given means.
    Oracle {
        #[arg(long, value_delimiter = ',', num_args = 1.., allow_negative_numbers = true)]
        rewards: Vec<f64>,
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        constraint: Vec<f64>,
        #[arg(long)]
        c0: f64,
    },
    /// Re-run a learner over a trace file.
    Replay {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        learner: LearnerKind,
        /// Seed of the sampling stream (default: derived from the trace seed).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Write the trace a config generates for one horizon and replicate.
    Trace {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        horizon: usize,
        #[arg(long, default_value_t = 0)]
        replicate: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn load_config(path: &Path, seed: Option<u64>) -> anyhow::Result<ExperimentConfig> {
    let mut config = ExperimentConfig::load(path)?;
    let env = std::env::var(SEED_ENV_VAR).ok();
    config.master_seed = resolve_seed(seed, env.as_deref(), config.master_seed)?;
    Ok(config)
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Run { config, out, seed, jobs, timing } => {
            let mut config = load_config(&config, seed)?;
            if let Some(out) = out {
                config.output_dir = out;
            }
            config.record_timing |= timing;
            let output = execute(&config, jobs)?;
            output.write_to(&config.output_dir)?;
            print!("{}", format_summary(&output.summary));
            if config.horizons.len() >= 3 {
                let thresholds: BTreeMap<_, _> = config.learners.iter().map(|l| (l.label.clone(), l.thresholds)).collect();
                let rows = fit_and_report(&output.summary, &thresholds)?;
                let path = config.output_dir.join("exponents.csv");
                csvio::write_exponents(File::create(&path).with_context(|| path.display().to_string())?, &rows)?;
                println!();
                print!("{}", format_exponents(&rows));
            }
            println!("\nwrote {}", config.output_dir.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Accept { seed, jobs, rerun_jobs, out } => {
            let env = std::env::var(SEED_ENV_VAR).ok();
            let seed = resolve_seed(seed, env.as_deref(), ACCEPTANCE_SEED)?;
            let (grids, outcomes) = acceptance::run_all(seed, jobs, Some(rerun_jobs))?;
            if let Some(dir) = out {
                for (name, grid) in grids.all() {
                    grid.write_to(&dir.join(name))?;
                }
            }
            for o in &outcomes {
                println!("{o}");
            }
            let failed = outcomes.iter().filter(|o| !o.passed).count();
            println!("{} of {} checks passed", outcomes.len() - failed, outcomes.len());
            Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Oracle { rewards, constraint, c0 } => {
            let sol = best_fixed(&rewards, &constraint, c0)?;
            let probs: Vec<String> = sol.distribution.probs().iter().map(|p| format!("{p:.6}")).collect();
            println!("value        {:.9}", sol.value);
            println!("distribution [{}]", probs.join(", "));
            println!("active       {}", sol.active);
            if c0 > 0.0 {
                let eps = (c0 * 1e-3).min(1e-3);
                println!("h'(0) approx {:.6}", h_slope_at_zero(&rewards, &constraint, c0, eps)?);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Replay { trace, learner, seed } => {
            let file = File::open(&trace).with_context(|| trace.display().to_string())?;
            let tr = csvio::read_trace(BufReader::new(file))?;
            let seed = seed.unwrap_or_else(|| learner_seed(tr.seed(), learner.name()));
            let mut l = make_learner(learner, tr.num_actions(), tr.horizon(), tr.model().threshold(), &ParamOverrides::default())?;
            let out = play(&mut l, &tr, &mut stream_rng(seed, Stream::Learner))?;
            let (max_lambda, cap) = (out.max_lambda, out.lambda_cap);
            let r = RunResult::evaluate(out.records, &tr)?;
            println!("learner          {learner}");
            println!("T, K             {}, {}", tr.horizon(), tr.num_actions());
            println!("sampling seed    {seed}");
            println!("comparator       {:.6}", r.comparator.value);
            println!("regret           {:.6}", r.regret);
            println!("realized_regret  {:.6}", r.realized_regret);
            println!("violation        {:.6}", r.violation);
            println!("variation        {:.6}", r.variation);
            println!("max_lambda       {max_lambda:.6} (cap {cap:.6})");
            Ok(ExitCode::SUCCESS)
        }
        Command::Trace { config, horizon, replicate, seed, out } => {
            let config = load_config(&config, seed)?;
            if horizon == 0 {
                bail!("horizon must be positive");
            }
            let env = &config.environment;
            let seed = environment_seed(config.master_seed, horizon, replicate);
            let tr = generate(&env.process, &env.model, horizon, seed)?;
            let file = File::create(&out).with_context(|| out.display().to_string())?;
            csvio::write_trace(BufWriter::new(file), &tr)?;
            println!("wrote {} (seed {seed})", out.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}
