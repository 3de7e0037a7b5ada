//! Growth-exponent table over a summary.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use clewa_core::fit_exponent;

use crate::config::SlopeThresholds;
use crate::error::{HarnessError, Result};
use crate::experiment::SummaryRow;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Metric {
    Regret,
    RealizedRegret,
    Violation,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Regret, Metric::RealizedRegret, Metric::Violation];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Regret => "regret",
            Metric::RealizedRegret => "realized_regret",
            Metric::Violation => "violation",
        }
    }

    fn mean(self, row: &SummaryRow) -> f64 {
        match self {
            Metric::Regret => row.regret_mean,
            Metric::RealizedRegret => row.realized_regret_mean,
            Metric::Violation => row.violation_mean,
        }
    }

    fn threshold(self, t: &SlopeThresholds) -> Option<f64> {
        match self {
            Metric::Regret => t.regret,
            Metric::RealizedRegret => t.realized_regret,
            Metric::Violation => t.violation,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExponentRow {
    pub learner: String,
    pub metric: Metric,
    pub slope: f64,
    pub threshold: Option<f64>,
    /// `Some(true)` if the slope is within the threshold, `None` if there is none.
    pub verdict: Option<bool>,
}

impl ExponentRow {
    pub fn verdict_str(&self) -> &'static str {
        match self.verdict {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "-",
        }
    }
}

/// Fits the log-log slope of each mean metric against `T`, per learner.
///
/// Learners missing from `thresholds` are reported without a verdict. Fails
/// if any learner has fewer than three horizons.
pub fn fit_and_report(summary: &[SummaryRow], thresholds: &BTreeMap<String, SlopeThresholds>) -> Result<Vec<ExponentRow>> {
    let mut by_learner: BTreeMap<&str, Vec<&SummaryRow>> = BTreeMap::new();
    for row in summary {
        by_learner.entry(&row.learner).or_default().push(row);
    }
    let mut out = Vec::new();
    for (learner, rows) in by_learner {
        if rows.len() < 3 {
            return Err(HarnessError::Report(format!(
                "learner {learner:?} has {} horizons; slope fits need at least 3",
                rows.len()
            )));
        }
        let limits = thresholds.get(learner).copied().unwrap_or_default();
        for metric in Metric::ALL {
            let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.horizon as f64, metric.mean(r))).collect();
            let slope = fit_exponent(&points)?;
            let threshold = metric.threshold(&limits);
            out.push(ExponentRow {
                learner: learner.to_string(),
                metric,
                slope,
                threshold,
                verdict: threshold.map(|th| slope <= th),
            });
        }
    }
    Ok(out)
}

pub fn format_summary(rows: &[SummaryRow]) -> String {
    let mut s = format!(
        "{:<18} {:>8} {:>12} {:>10} {:>12} {:>12} {:>10} {:>10} {:>6}\n",
        "learner", "T", "regret", "sd", "realized", "violation", "sd", "bound", "frac"
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{:<18} {:>8} {:>12.2} {:>10.2} {:>12.2} {:>12.2} {:>10.2} {:>10.2} {:>6.2}",
            r.learner,
            r.horizon,
            r.regret_mean,
            r.regret_std,
            r.realized_regret_mean,
            r.violation_mean,
            r.violation_std,
            r.regret_bound,
            r.bound_fraction
        );
    }
    s
}

pub fn format_exponents(rows: &[ExponentRow]) -> String {
    let mut s = format!("{:<18} {:<16} {:>8} {:>10} {:>7}\n", "learner", "metric", "slope", "threshold", "verdict");
    for r in rows {
        let th = r.threshold.map_or_else(|| "-".to_string(), |t| format!("{t:.3}"));
        let _ = writeln!(s, "{:<18} {:<16} {:>8.3} {:>10} {:>7}", r.learner, r.metric.name(), r.slope, th, r.verdict_str());
    }
    s
}
