//! Experiment configuration (JSON). The schema is documented in `docs/config.md`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::complexity::InnerMethod;
use crate::error::{invalid, Result};
use crate::hypotheses::{Domain, ModelSpec, OptimizerConfig, SettingId};
use crate::query::QueryStrategy;
use crate::task::{make_builtin_task, QueryDistribution, SyntheticTask};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    #[serde(default = "default_num_sigma")]
    pub num_sigma: usize,
    #[serde(default = "default_true_risk_n")]
    pub true_risk_n: usize,
}

fn default_num_sigma() -> usize {
    256
}
fn default_true_risk_n() -> usize {
    100_000
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            num_sigma: default_num_sigma(),
            true_risk_n: default_true_risk_n(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Builtin task name.
    pub task: String,
    pub setting: SettingId,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_c")]
    pub c: f64,
    #[serde(default)]
    pub seed: u64,
    /// Unlabeled pool size (the empirical proxy for `P_X`).
    #[serde(default = "default_pool_size")]
    pub pool_size: usize,
    /// Queried sample size `m` for `bound`, `rademacher` and `coverage`.
    #[serde(default = "default_sample_size")]
    pub sample_size: usize,
    /// Labeled counts after each active-learning round.
    #[serde(default = "default_budget")]
    pub budget: Vec<usize>,
    #[serde(default)]
    pub strategy: QueryStrategy,
    #[serde(default)]
    pub query_distribution: QueryDistribution,
    #[serde(default)]
    pub mc: McConfig,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub inner: InnerMethod,
    #[serde(default)]
    pub model: ModelSpec,
    /// Bins per axis for total-variation estimates.
    #[serde(default = "default_ipm_bins")]
    pub ipm_bins: usize,
    /// Cap on every bias; defaults to `M_X + M_Y`.
    #[serde(default)]
    pub bias_bound: Option<f64>,
}

fn default_delta() -> f64 {
    0.1
}
fn default_c() -> f64 {
    1.0
}
fn default_pool_size() -> usize {
    200
}
fn default_sample_size() -> usize {
    50
}
fn default_budget() -> Vec<usize> {
    vec![10, 20, 40]
}
fn default_ipm_bins() -> usize {
    10
}

impl ExperimentConfig {
    /// A config with every optional field at its default.
    pub fn new(task: &str, setting: SettingId) -> Self {
        Self {
            task: task.to_string(),
            setting,
            delta: default_delta(),
            c: default_c(),
            seed: 0,
            pool_size: default_pool_size(),
            sample_size: default_sample_size(),
            budget: default_budget(),
            strategy: QueryStrategy::default(),
            query_distribution: QueryDistribution::default(),
            mc: McConfig::default(),
            optimizer: OptimizerConfig::default(),
            inner: InnerMethod::default(),
            model: ModelSpec::default(),
            ipm_bins: default_ipm_bins(),
            bias_bound: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return invalid(format!("delta must lie in (0, 1), got {}", self.delta));
        }
        if !(self.c > 0.0) {
            return invalid(format!("c must be positive, got {}", self.c));
        }
        let counts = [
            ("pool_size", self.pool_size),
            ("sample_size", self.sample_size),
            ("mc.true_risk_n", self.mc.true_risk_n),
            ("mc.num_sigma", self.mc.num_sigma),
            ("ipm_bins", self.ipm_bins),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| *v == 0) {
            return invalid(format!("{name} must be at least 1"));
        }
        if self.mc.true_risk_n < 2 {
            return invalid("mc.true_risk_n must be at least 2");
        }
        if self.budget.is_empty() {
            return invalid("budget must list at least one labeled count");
        }
        if self.budget.windows(2).any(|w| w[1] < w[0]) {
            return invalid("budget must be nondecreasing");
        }
        if self.budget[0] == 0 || *self.budget.last().unwrap() > self.pool_size {
            return invalid("budget entries must lie in 1..=pool_size");
        }
        if let Some(b) = self.bias_bound {
            if !(b >= 0.0) {
                return invalid("bias_bound must be nonnegative");
            }
        }
        self.strategy.validate()?;
        make_builtin_task(&self.task)?;
        Ok(())
    }

    pub fn task(&self) -> Result<SyntheticTask> {
        let mut task = make_builtin_task(&self.task)?;
        task.seed = self.seed;
        Ok(task)
    }

    /// `M_X`, `M_Y` of the task and the configured bias cap.
    pub fn domain(&self, task: &SyntheticTask) -> Domain {
        let d = Domain::new(task.domain_bound, task.label_bound);
        match self.bias_bound {
            Some(b) => d.with_bias_bound(b),
            None => d,
        }
    }
}
