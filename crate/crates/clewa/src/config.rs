//! Experiment configuration.
//!
//! Configs are small TOML files: top-level scalars, one `[environment]`
//! section and one `[learner.<label>]` section per learner. No other nesting
//! is accepted.
//!
//! ```toml
//! master_seed = 7
//! horizons = [1024, 2048, 4096]
//! replicates = 20
//! output_dir = "out"
//!
//! [environment]
//! process = "iid"                  # iid | switching | low-variation
//! means = [0.9, 0.5, 0.1]          # iid / switching phase A / low-variation base
//! # means_b = [...]                # switching phase B
//! # period = 500                   # switching
//! # amplitude = 0.05               # low-variation
//! constraint_mean = [0.1, 0.5, 0.9]
//! c0 = 0.5
//!
//! [learner.lewa]
//! kind = "lewa"                    # defaults to the section label
//! # eta, delta, gamma, epsilon, explore_fraction = ...
//! # dual_regularizer = "delta"     # or "gamma"
//! max_violation_slope = 0.85
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clewa_core::{ConstraintModel, DualRegularizer, LearnerKind, ParamOverrides, RewardProcess};
use serde::Deserialize;

use crate::error::{io_err, HarnessError, Result};

/// Environment variable that overrides the configured master seed.
pub const SEED_ENV_VAR: &str = "CLEWA_SEED";

#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentSpec {
    pub process: RewardProcess,
    pub model: ConstraintModel,
}

/// Upper limits on fitted growth exponents; `None` means report only.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SlopeThresholds {
    pub regret: Option<f64>,
    pub realized_regret: Option<f64>,
    pub violation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnerSpec {
    /// Unique name, used for output rows and for seeding the learner's stream.
    pub label: String,
    pub kind: LearnerKind,
    pub overrides: ParamOverrides,
    pub thresholds: SlopeThresholds,
}

impl LearnerSpec {
    pub fn new(label: impl Into<String>, kind: LearnerKind) -> Self {
        Self { label: label.into(), kind, overrides: ParamOverrides::default(), thresholds: SlopeThresholds::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub learners: Vec<LearnerSpec>,
    pub environment: EnvironmentSpec,
    pub horizons: Vec<usize>,
    pub replicates: usize,
    pub master_seed: u64,
    pub output_dir: PathBuf,
    /// Measure wall time per run. Off by default so `runs.csv` is reproducible.
    pub record_timing: bool,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text)?;
        let config = raw.into_config()?;
        config.validate()?;
        Ok(config)
    }

    pub fn num_actions(&self) -> usize {
        self.environment.model.num_actions()
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(config_err("replicates must be at least 1"));
        }
        if self.horizons.is_empty() {
            return Err(config_err("horizons must not be empty"));
        }
        if self.horizons[0] == 0 || self.horizons.windows(2).any(|w| w[0] >= w[1]) {
            return Err(config_err(format!("horizons must be positive and strictly increasing, got {:?}", self.horizons)));
        }
        if self.learners.is_empty() {
            return Err(config_err("at least one learner section is required"));
        }
        let mut labels: Vec<&str> = self.learners.iter().map(|l| l.label.as_str()).collect();
        labels.sort_unstable();
        if let Some(w) = labels.windows(2).find(|w| w[0] == w[1]) {
            return Err(config_err(format!("duplicate learner label {:?}", w[0])));
        }
        self.environment.process.validate()?;
        let k = self.environment.model.num_actions();
        if self.environment.process.num_actions() != k {
            return Err(config_err(format!(
                "reward process has {} actions but the constraint mean has {k}",
                self.environment.process.num_actions()
            )));
        }
        if !self.environment.model.is_feasible() {
            let max = self.environment.model.mean().iter().cloned().fold(f64::MIN, f64::max);
            return Err(clewa_core::Error::Infeasible { max_mean: max, threshold: self.environment.model.threshold() }.into());
        }
        // Surface bad overrides now rather than halfway through a grid.
        for spec in &self.learners {
            for &t in &self.horizons {
                clewa_core::make_learner(spec.kind, k, t, self.environment.model.threshold(), &spec.overrides)
                    .map_err(|e| config_err(format!("learner {:?} at T={t}: {e}", spec.label)))?;
            }
        }
        Ok(())
    }
}

/// Seed precedence: command-line flag, then `CLEWA_SEED`, then the config.
pub fn resolve_seed(flag: Option<u64>, env: Option<&str>, config: u64) -> Result<u64> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match env {
        Some(s) => s.trim().parse().map_err(|_| config_err(format!("{SEED_ENV_VAR}={s:?} is not a u64"))),
        None => Ok(config),
    }
}

fn config_err(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    master_seed: u64,
    horizons: Vec<usize>,
    replicates: usize,
    #[serde(default = "default_output_dir")]
    output_dir: PathBuf,
    #[serde(default)]
    record_timing: bool,
    environment: RawEnvironment,
    #[serde(default)]
    learner: BTreeMap<String, RawLearner>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("clewa-out")
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEnvironment {
    process: String,
    means: Vec<f64>,
    means_b: Option<Vec<f64>>,
    period: Option<usize>,
    amplitude: Option<f64>,
    constraint_mean: Vec<f64>,
    c0: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLearner {
    kind: Option<String>,
    eta: Option<f64>,
    delta: Option<f64>,
    gamma: Option<f64>,
    epsilon: Option<f64>,
    explore_fraction: Option<f64>,
    dual_regularizer: Option<String>,
    max_regret_slope: Option<f64>,
    max_realized_regret_slope: Option<f64>,
    max_violation_slope: Option<f64>,
}

impl RawConfig {
    fn into_config(self) -> Result<ExperimentConfig> {
        let environment = self.environment.into_spec()?;
        let learners = self.learner.into_iter().map(|(label, raw)| raw.into_spec(label)).collect::<Result<_>>()?;
        Ok(ExperimentConfig {
            learners,
            environment,
            horizons: self.horizons,
            replicates: self.replicates,
            master_seed: self.master_seed,
            output_dir: self.output_dir,
            record_timing: self.record_timing,
        })
    }
}

impl RawEnvironment {
    fn into_spec(self) -> Result<EnvironmentSpec> {
        let process = match self.process.to_ascii_lowercase().as_str() {
            "iid" => {
                reject_extra(&[("means_b", self.means_b.is_some()), ("period", self.period.is_some()), ("amplitude", self.amplitude.is_some())])?;
                RewardProcess::IidBernoulli { means: self.means }
            }
            "switching" => {
                reject_extra(&[("amplitude", self.amplitude.is_some())])?;
                RewardProcess::Switching {
                    means_a: self.means,
                    means_b: self.means_b.ok_or_else(|| config_err("switching process needs means_b"))?,
                    period: self.period.ok_or_else(|| config_err("switching process needs period"))?,
                }
            }
            "low-variation" | "low_variation" | "lowvar" => {
                reject_extra(&[("means_b", self.means_b.is_some()), ("period", self.period.is_some())])?;
                RewardProcess::LowVariation {
                    base: self.means,
                    amplitude: self.amplitude.ok_or_else(|| config_err("low-variation process needs amplitude"))?,
                }
            }
            other => return Err(config_err(format!("unknown process {other:?} (iid, switching, low-variation)"))),
        };
        let model = ConstraintModel::new(self.constraint_mean, self.c0)?;
        Ok(EnvironmentSpec { process, model })
    }
}

fn reject_extra(fields: &[(&str, bool)]) -> Result<()> {
    match fields.iter().find(|(_, present)| *present) {
        Some((name, _)) => Err(config_err(format!("{name} does not apply to this process"))),
        None => Ok(()),
    }
}

impl RawLearner {
    fn into_spec(self, label: String) -> Result<LearnerSpec> {
        let kind_name = self.kind.as_deref().unwrap_or(&label);
        let kind = kind_name
            .parse::<LearnerKind>()
            .map_err(|_| config_err(format!("learner {label:?}: unknown kind {kind_name:?}")))?;
        let dual_regularizer = match self.dual_regularizer.as_deref() {
            None => None,
            Some("delta") => Some(DualRegularizer::Delta),
            Some("gamma") => Some(DualRegularizer::Gamma),
            Some(other) => return Err(config_err(format!("learner {label:?}: dual_regularizer {other:?} (delta or gamma)"))),
        };
        Ok(LearnerSpec {
            label,
            kind,
            overrides: ParamOverrides {
                eta: self.eta,
                delta: self.delta,
                gamma: self.gamma,
                epsilon: self.epsilon,
                explore_fraction: self.explore_fraction,
                dual_regularizer,
            },
            thresholds: SlopeThresholds {
                regret: self.max_regret_slope,
                realized_regret: self.max_realized_regret_slope,
                violation: self.max_violation_slope,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"
master_seed = 3
horizons = [16, 32, 64]
replicates = 2

[environment]
process = "iid"
means = [0.9, 0.1]
constraint_mean = [0.2, 0.8]
c0 = 0.5

[learner.lewa]
max_violation_slope = 0.85

[learner.fast]
kind = "bandit-lewa"
gamma = 0.1
dual_regularizer = "gamma"
"#;

    #[test]
    fn parses_sections() {
        let c = ExperimentConfig::from_toml_str(BASIC).unwrap();
        assert_eq!(c.master_seed, 3);
        assert_eq!(c.learners.len(), 2);
        let fast = c.learners.iter().find(|l| l.label == "fast").unwrap();
        assert_eq!(fast.kind, LearnerKind::BanditLewa);
        assert_eq!(fast.overrides.gamma, Some(0.1));
        assert_eq!(fast.overrides.dual_regularizer, Some(DualRegularizer::Gamma));
        let lewa = c.learners.iter().find(|l| l.label == "lewa").unwrap();
        assert_eq!(lewa.kind, LearnerKind::Lewa);
        assert_eq!(lewa.thresholds.violation, Some(0.85));
        assert_eq!(c.output_dir, PathBuf::from("clewa-out"));
    }

    #[test]
    fn rejects_bad_horizons_and_replicates() {
        for (from, to) in [("horizons = [16, 32, 64]", "horizons = [32, 16]"), ("horizons = [16, 32, 64]", "horizons = []"), ("replicates = 2", "replicates = 0")] {
            let text = BASIC.replace(from, to);
            assert!(matches!(ExperimentConfig::from_toml_str(&text), Err(HarnessError::Config(_))), "{to}");
        }
    }

    #[test]
    fn rejects_infeasible_model() {
        let text = BASIC.replace("c0 = 0.5", "c0 = 0.95");
        assert!(matches!(
            ExperimentConfig::from_toml_str(&text),
            Err(HarnessError::Core(clewa_core::Error::Infeasible { .. }))
        ));
    }

    #[test]
    fn rejects_unknown_keys_and_kinds() {
        assert!(ExperimentConfig::from_toml_str(&BASIC.replace("gamma = 0.1", "gama = 0.1")).is_err());
        assert!(ExperimentConfig::from_toml_str(&BASIC.replace("\"bandit-lewa\"", "\"ucb\"")).is_err());
        assert!(ExperimentConfig::from_toml_str(&BASIC.replace("\"iid\"", "\"markov\"")).is_err());
    }

    #[test]
    fn rejects_mismatched_dimensions() {
        let text = BASIC.replace("means = [0.9, 0.1]", "means = [0.9, 0.1, 0.5]");
        assert!(ExperimentConfig::from_toml_str(&text).is_err());
    }

    #[test]
    fn seed_precedence() {
        assert_eq!(resolve_seed(Some(1), Some("2"), 3).unwrap(), 1);
        assert_eq!(resolve_seed(None, Some("2"), 3).unwrap(), 2);
        assert_eq!(resolve_seed(None, None, 3).unwrap(), 3);
        assert!(resolve_seed(None, Some("x"), 3).is_err());
    }
}
