use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::compiler::SamplingStrategy;
use crate::error::{Error, Result};
use crate::models::ModelSpec;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Config(format!("unknown output format {other:?} (expected csv or json)"))),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    pub format: Format,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShadowBenchConfig {
    pub n_shots: Vec<usize>,
    pub repeats: usize,
    pub mom_batches: usize,
}

impl Default for ShadowBenchConfig {
    fn default() -> Self {
        Self {
            n_shots: vec![1_000, 2_000, 5_000, 10_000, 20_000, 50_000],
            repeats: 20,
            mom_batches: 10,
        }
    }
}

fn default_t() -> f64 {
    1.0
}
fn default_n_steps() -> usize {
    50
}
fn default_n_samples() -> usize {
    10_000
}
fn default_step_size() -> f64 {
    0.02
}
fn default_n_steps_list() -> Vec<usize> {
    vec![10, 20, 30, 40, 50]
}
fn default_step_sizes() -> Vec<f64> {
    vec![0.01, 0.02, 0.03, 0.04, 0.05]
}
fn default_budget() -> f64 {
    1e12
}

/// Everything one CLI invocation needs. Only `model` and `strategy` are
/// required in the TOML file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSpec,
    pub strategy: SamplingStrategy,
    /// Total evolution time for `run`, `trace-probs` and `sweep-stepsize`.
    #[serde(default = "default_t")]
    pub t: f64,
    #[serde(default = "default_n_steps")]
    pub n_steps: usize,
    #[serde(default = "default_n_samples")]
    pub n_samples: usize,
    #[serde(default)]
    pub master_seed: u64,
    /// Fixed `t/N` for `sweep-steps`.
    #[serde(default = "default_step_size")]
    pub step_size: f64,
    #[serde(default = "default_n_steps_list")]
    pub n_steps_list: Vec<usize>,
    #[serde(default = "default_step_sizes")]
    pub step_sizes: Vec<f64>,
    /// Attach the step log of trajectory 0 to `run` output.
    #[serde(default)]
    pub record_traces: bool,
    /// Upper bound on `dim² · N · n_samples` summed over the points of one command.
    #[serde(default = "default_budget")]
    pub resource_budget: f64,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub shadow_bench: ShadowBenchConfig,
}

impl RunConfig {
    pub fn new(model: ModelSpec, strategy: SamplingStrategy) -> Self {
        Self {
            model,
            strategy,
            t: default_t(),
            n_steps: default_n_steps(),
            n_samples: default_n_samples(),
            master_seed: 0,
            step_size: default_step_size(),
            n_steps_list: default_n_steps_list(),
            step_sizes: default_step_sizes(),
            record_traces: false,
            resource_budget: default_budget(),
            output: OutputConfig::default(),
            shadow_bench: ShadowBenchConfig::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.strategy.validate()?;
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.t.is_finite() && self.t > 0.0) {
            return bad(format!("t must be positive, got {}", self.t));
        }
        if self.n_steps == 0 {
            return bad("n_steps must be at least 1".into());
        }
        if self.n_samples == 0 {
            return bad("n_samples must be at least 1".into());
        }
        if !(self.step_size.is_finite() && self.step_size > 0.0) {
            return bad(format!("step_size must be positive, got {}", self.step_size));
        }
        if self.n_steps_list.is_empty() || self.n_steps_list.contains(&0) {
            return bad("n_steps_list must be non-empty with entries >= 1".into());
        }
        if self.step_sizes.is_empty() || self.step_sizes.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return bad("step_sizes must be non-empty and positive".into());
        }
        if self.resource_budget.is_nan() || self.resource_budget <= 0.0 {
            return bad("resource_budget must be positive".into());
        }
        let sb = &self.shadow_bench;
        if sb.n_shots.is_empty() || sb.repeats < 2 || sb.mom_batches == 0 {
            return bad("shadow_bench needs n_shots entries, repeats >= 2 and mom_batches >= 1".into());
        }
        if let Some(&n) = sb.n_shots.iter().find(|&&n| n == 0 || !n.is_multiple_of(sb.mom_batches)) {
            return bad(format!("shadow_bench n_shots {n} is not a positive multiple of mom_batches {}", sb.mom_batches));
        }
        Ok(())
    }
}
