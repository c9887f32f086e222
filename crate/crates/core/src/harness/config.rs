use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelModel;
use crate::quadrature::DEFAULT_ORDER;
use crate::scalar_prior::SparsePrior;
use crate::{Error, Result};

/// Experiment description, read from a single JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub prior: SparsePrior,
    pub channel: ChannelModel,
    #[serde(default = "default_n_list")]
    pub n_list: Vec<usize>,
    #[serde(default = "default_alpha_grid")]
    pub alpha_grid: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_ode_step")]
    pub ode_step: f64,
    #[serde(default = "default_quad_order")]
    pub quad_order: usize,
    /// Directory for the CSV/JSON outputs; `None` means the current directory.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

fn default_n_list() -> Vec<usize> {
    vec![200, 500, 1000, 2000, 4000]
}

fn default_alpha_grid() -> Vec<f64> {
    (1..=16).map(|k| 0.5 * k as f64).collect()
}

fn default_trials() -> usize {
    1000
}

fn default_ode_step() -> f64 {
    1e-2
}

fn default_quad_order() -> usize {
    DEFAULT_ORDER
}

impl ExperimentConfig {
    /// Default protocol for the given models.
    pub fn new(prior: SparsePrior, channel: ChannelModel) -> Self {
        Self {
            prior,
            channel,
            n_list: default_n_list(),
            alpha_grid: default_alpha_grid(),
            trials: default_trials(),
            base_seed: 0,
            ode_step: default_ode_step(),
            quad_order: default_quad_order(),
            output_dir: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json_from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::config("trials must be >= 1"));
        }
        if self.n_list.is_empty() {
            return Err(Error::config("n_list must be nonempty"));
        }
        if self.n_list.contains(&0) {
            return Err(Error::config("n_list entries must be >= 1"));
        }
        if self.n_list.iter().any(|&n| n as u64 > u32::MAX as u64) {
            return Err(Error::config("n_list entries must fit in 32 bits"));
        }
        if self.alpha_grid.is_empty() {
            return Err(Error::config("alpha_grid must be nonempty"));
        }
        if self.alpha_grid.iter().any(|a| !a.is_finite() || *a < 0.0) {
            return Err(Error::config("alpha_grid entries must be finite and >= 0"));
        }
        if self.alpha_grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::config("alpha_grid must be strictly increasing"));
        }
        if !(self.ode_step > 0.0) || !self.ode_step.is_finite() {
            return Err(Error::config("ode_step must be positive"));
        }
        if self.quad_order < 2 {
            return Err(Error::config("quad_order must be >= 2"));
        }
        Ok(())
    }

    pub fn alpha_max(&self) -> f64 {
        self.alpha_grid.last().copied().unwrap_or(0.0)
    }

    pub fn output_path(&self, file: &str) -> PathBuf {
        match &self.output_dir {
            Some(dir) => dir.join(file),
            None => PathBuf::from(file),
        }
    }
}

fn serde_json_from_str(text: &str) -> Result<ExperimentConfig> {
    serde_json::from_str(text).map_err(|e| Error::config(format!("invalid config: {e}")))
}
