//! JSON run configuration.
//!
//! One schema serves every subcommand; each command validates the fields it
//! needs and ignores none (unknown keys are rejected so typos fail fast).
//! The manifest echoes the resolved config verbatim, so a run can be
//! reproduced from its output directory alone.

use serde::{Deserialize, Serialize};

use levy_ou::levy_measure::MeasureConfig;
use levy_ou::model::{BetaRule, GammaRule};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub spectrum: GammaRule,
    pub beta: BetaRule,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallConfig {
    /// Dense center coordinates in the eigenbasis (finitely supported).
    pub center: Vec<f64>,
    pub radius: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeatConfig {
    pub d: usize,
    pub n_modes: usize,
    /// Initial datum as (1-based linear mode, coefficient) pairs.
    #[serde(default)]
    pub x0_modes: Vec<(usize, f64)>,
    /// Grid points per axis, boundary included.
    pub grid_points: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub measure: Option<MeasureConfig>,
    pub model: Option<ModelConfig>,
    pub seed: Option<u64>,

    // Criterion parameters.
    pub n_max: Option<usize>,
    pub tol: Option<f64>,
    pub t0: Option<f64>,

    // Simulation parameters.
    pub t: Option<f64>,
    pub times: Option<Vec<f64>>,
    pub n_modes: Option<usize>,
    pub n_grid: Option<Vec<usize>>,
    pub m: Option<usize>,
    pub x0: Option<Vec<f64>>,
    /// Jump-size cutoff for non-stable stepping.
    pub eps: Option<f64>,
    pub gaussian_residual: Option<bool>,

    pub ball: Option<BallConfig>,
    pub heat: Option<HeatConfig>,
}

impl RunConfig {
    pub fn require_measure(&self) -> Result<&MeasureConfig, String> {
        self.measure
            .as_ref()
            .ok_or_else(|| "config needs a \"measure\" record".to_string())
    }

    pub fn require_model(&self) -> Result<&ModelConfig, String> {
        self.model
            .as_ref()
            .ok_or_else(|| "config needs a \"model\" record with spectrum and beta".to_string())
    }

    pub fn require_trajectories(&self) -> Result<usize, String> {
        match self.m {
            Some(m) if m >= 1 => Ok(m),
            Some(m) => Err(format!("\"m\" must be at least 1, got {m}")),
            None => Err("config needs \"m\" (trajectory count)".to_string()),
        }
    }
}
