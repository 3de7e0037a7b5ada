//! CSV writers and the trace file format.
//!
//! Floats are written as `{:.16e}`: 17 significant digits, enough to
//! round-trip any `f64`.
//!
//! A trace file is long format, one row per (round, action), preceded by
//! `#` metadata lines:
//!
//! ```text
//! # clewa-trace v1
//! # seed=42
//! # c0=5.0000000000000000e-1
//! # constraint_mean=1.0000000000000000e-1;9.0000000000000000e-1
//! round,action,reward,constraint
//! 0,0,1.0000000000000000e0,0.0000000000000000e0
//! ...
//! ```

use std::io::{Read, Write};

use clewa_core::{ConstraintModel, EnvironmentTrace};

use crate::error::{HarnessError, Result};
use crate::experiment::{RunRow, SummaryRow};
use crate::report::ExponentRow;

const TRACE_MAGIC: &str = "clewa-trace v1";

pub const RUNS_HEADER: [&str; 10] =
    ["learner", "T", "replicate", "seed", "regret", "realized_regret", "violation", "variation", "max_lambda", "wall_ms"];

pub const SUMMARY_HEADER: [&str; 12] = [
    "learner",
    "kind",
    "T",
    "replicates",
    "regret_mean",
    "regret_std",
    "realized_regret_mean",
    "realized_regret_std",
    "violation_mean",
    "violation_std",
    "regret_bound",
    "bound_fraction",
];

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_runs<W: Write>(w: W, runs: &[RunRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(RUNS_HEADER)?;
    for r in runs {
        out.write_record([
            r.learner.clone(),
            r.horizon.to_string(),
            r.replicate.to_string(),
            r.seed.to_string(),
            fmt_f64(r.regret),
            fmt_f64(r.realized_regret),
            fmt_f64(r.violation),
            fmt_f64(r.variation),
            fmt_f64(r.max_lambda),
            r.wall_ms.to_string(),
        ])?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_summary<W: Write>(w: W, rows: &[SummaryRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(SUMMARY_HEADER)?;
    for r in rows {
        out.write_record([
            r.learner.clone(),
            r.kind.name().to_string(),
            r.horizon.to_string(),
            r.replicates.to_string(),
            fmt_f64(r.regret_mean),
            fmt_f64(r.regret_std),
            fmt_f64(r.realized_regret_mean),
            fmt_f64(r.realized_regret_std),
            fmt_f64(r.violation_mean),
            fmt_f64(r.violation_std),
            fmt_f64(r.regret_bound),
            fmt_f64(r.bound_fraction),
        ])?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_exponents<W: Write>(w: W, rows: &[ExponentRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["learner", "metric", "slope", "threshold", "verdict"])?;
    for r in rows {
        out.write_record([
            r.learner.clone(),
            r.metric.name().to_string(),
            fmt_f64(r.slope),
            r.threshold.map(fmt_f64).unwrap_or_default(),
            r.verdict_str().to_string(),
        ])?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_trace<W: Write>(mut w: W, trace: &EnvironmentTrace) -> Result<()> {
    let model = trace.model();
    let mean: Vec<String> = model.mean().iter().map(|&m| fmt_f64(m)).collect();
    let header = format!(
        "# {TRACE_MAGIC}\n# seed={}\n# c0={}\n# constraint_mean={}\n",
        trace.seed(),
        fmt_f64(model.threshold()),
        mean.join(";")
    );
    w.write_all(header.as_bytes()).map_err(csv::Error::from)?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["round", "action", "reward", "constraint"])?;
    for (t, (r, c)) in trace.rewards().zip(trace.constraints()).enumerate() {
        for (i, (ri, ci)) in r.iter().zip(c).enumerate() {
            out.write_record([t.to_string(), i.to_string(), fmt_f64(*ri), fmt_f64(*ci)])?;
        }
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_trace<R: Read>(mut r: R) -> Result<EnvironmentTrace> {
    let mut text = String::new();
    r.read_to_string(&mut text).map_err(csv::Error::from)?;

    let mut magic = false;
    let (mut seed, mut c0, mut mean) = (None, None, None);
    for line in text.lines().filter_map(|l| l.strip_prefix('#')).map(str::trim) {
        if line == TRACE_MAGIC {
            magic = true;
        } else if let Some((key, value)) = line.split_once('=') {
            match key.trim() {
                "seed" => seed = Some(value.trim().parse::<u64>().map_err(|_| trace_err(format!("bad seed {value:?}")))?),
                "c0" => c0 = Some(parse_f64(value)?),
                "constraint_mean" => mean = Some(value.split(';').map(parse_f64).collect::<Result<Vec<_>>>()?),
                _ => {}
            }
        }
    }
    if !magic {
        return Err(trace_err(format!("missing '# {TRACE_MAGIC}' line")));
    }
    let model = ConstraintModel::new(
        mean.ok_or_else(|| trace_err("missing constraint_mean"))?,
        c0.ok_or_else(|| trace_err("missing c0"))?,
    )?;
    let k = model.num_actions();

    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let mut rewards = Vec::new();
    let mut constraints = Vec::new();
    for (n, rec) in reader.records().enumerate() {
        let rec = rec?;
        if rec.len() != 4 {
            return Err(trace_err(format!("row {n}: expected 4 fields, got {}", rec.len())));
        }
        let round: usize = rec[0].trim().parse().map_err(|_| trace_err(format!("row {n}: bad round")))?;
        let action: usize = rec[1].trim().parse().map_err(|_| trace_err(format!("row {n}: bad action")))?;
        if (round, action) != (n / k, n % k) {
            return Err(trace_err(format!("row {n}: expected round {} action {}, got {round} {action}", n / k, n % k)));
        }
        rewards.push(parse_f64(&rec[2])?);
        constraints.push(parse_f64(&rec[3])?);
    }
    if rewards.is_empty() || !rewards.len().is_multiple_of(k) {
        return Err(trace_err(format!("{} rows is not a whole number of {k}-action rounds", rewards.len())));
    }
    Ok(EnvironmentTrace::from_parts(rewards, constraints, model, seed.unwrap_or(0))?)
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim().parse().map_err(|_| trace_err(format!("bad number {s:?}")))
}

fn trace_err(msg: impl Into<String>) -> HarnessError {
    HarnessError::Trace(msg.into())
}
