//! TOML experiment configuration. Unknown keys are rejected everywhere.
//!
//! ```toml
//! [model]
//! k = 10
//! v = 1.0
//!
//! [[estimators]]
//! kind = "adm"        # james-stein | positive-part | adm | mle
//! m = 4.0
//! c = 1.0
//!
//! [run]
//! theta_grid = { start = 0.0, stop = 12.0, step = 0.5 }
//! n_reps = 200000
//! seed = 20100901
//! crn = true
//! output = "out"
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::HarnessError;
use crate::error::{Error, Result};
use crate::figure1::{default_theta_grid, DEFAULT_SEED};
use crate::minimax::LogGrid;
use crate::model::ModelConfig;
use crate::risk::DEFAULT_N_REPS;
use crate::shrinkage::{AdmParams, ShrinkageEstimator};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub estimators: Vec<EstimatorSpec>,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub shrink: ShrinkSection,
    #[serde(default)]
    pub minimax: MinimaxSection,
    #[serde(default)]
    pub posterior: PosteriorSection,
    #[serde(default)]
    pub divergence: DivergenceSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub k: usize,
    pub v: f64,
    pub a: Option<f64>,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self { k: 10, v: 1.0, a: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKindName {
    #[serde(alias = "js")]
    JamesStein,
    #[serde(alias = "js+")]
    PositivePart,
    Adm,
    Mle,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorSpec {
    pub kind: EstimatorKindName,
    pub name: Option<String>,
    /// ADM only; defaults to `(k - 2) / 2`.
    pub m: Option<f64>,
    /// ADM only; defaults to 1.
    pub c: Option<f64>,
}

impl EstimatorSpec {
    pub fn build(&self, cfg: &ModelConfig) -> Result<ShrinkageEstimator, HarnessError> {
        if self.kind != EstimatorKindName::Adm && (self.m.is_some() || self.c.is_some()) {
            return Err(HarnessError::Config(format!(
                "estimator kind {:?} does not take `m` or `c`",
                self.kind
            )));
        }
        let est = match self.kind {
            EstimatorKindName::JamesStein => ShrinkageEstimator::james_stein(),
            EstimatorKindName::PositivePart => ShrinkageEstimator::positive_part(),
            EstimatorKindName::Mle => ShrinkageEstimator::mle(),
            EstimatorKindName::Adm => {
                let default = AdmParams::default_for(cfg);
                let m = match self.m {
                    Some(m) => m,
                    None => default?.m(),
                };
                ShrinkageEstimator::adm(AdmParams::new(m, self.c.unwrap_or(1.0))?)
            }
        };
        Ok(match &self.name {
            Some(name) => ShrinkageEstimator::new(name.clone(), est.kind().clone()),
            None => est,
        })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ThetaGrid {
    List(Vec<f64>),
    Range(ThetaRange),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl ThetaGrid {
    /// Points `start + i·step` up to `stop` inclusive (with a half-step guard
    /// against accumulated rounding).
    pub fn values(&self) -> Result<Vec<f64>> {
        match self {
            ThetaGrid::List(v) => Ok(v.clone()),
            ThetaGrid::Range(r) => {
                if !(r.step.is_finite() && r.step > 0.0 && r.start.is_finite() && r.stop.is_finite() && r.stop >= r.start) {
                    return Err(Error::domain("theta_grid", "need finite start <= stop and step > 0"));
                }
                let n = ((r.stop - r.start) / r.step + 0.5).floor() as usize;
                Ok((0..=n).map(|i| r.start + r.step * i as f64).collect())
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub theta_grid: Option<ThetaGrid>,
    #[serde(default = "default_n_reps")]
    pub n_reps: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_true")]
    pub crn: bool,
    pub output: Option<PathBuf>,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            theta_grid: None,
            n_reps: DEFAULT_N_REPS,
            seed: DEFAULT_SEED,
            crn: true,
            output: None,
        }
    }
}

impl RunSection {
    pub fn theta_values(&self) -> Result<Vec<f64>> {
        match &self.theta_grid {
            Some(g) => g.values(),
            None => Ok(default_theta_grid()),
        }
    }
}

fn default_n_reps() -> usize {
    DEFAULT_N_REPS
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShrinkSection {
    pub y_norm_sq: Option<f64>,
    pub y: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinimaxSection {
    pub grid_min: f64,
    pub grid_max: f64,
    pub grid_points: usize,
}

impl Default for MinimaxSection {
    fn default() -> Self {
        let g = LogGrid::default();
        Self {
            grid_min: g.min,
            grid_max: g.max,
            grid_points: g.points,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PosteriorSection {
    pub y_norm_sq: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DivergenceSection {
    pub theta_norm_sq: f64,
    pub eps: Vec<f64>,
    pub contrast_cuts: Vec<f64>,
}

impl Default for DivergenceSection {
    fn default() -> Self {
        Self {
            theta_norm_sq: 1.0,
            eps: (2..=8).map(|e| 10f64.powi(-e)).collect(),
            contrast_cuts: (1..=10).map(|e| 10f64.powi(e)).collect(),
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn model_config(&self) -> Result<ModelConfig> {
        let cfg = ModelConfig::new(self.model.k, self.model.v)?;
        match self.model.a {
            Some(a) => cfg.with_prior_variance(a),
            None => Ok(cfg),
        }
    }

    pub fn build_estimators(&self, cfg: &ModelConfig) -> Result<Vec<ShrinkageEstimator>, HarnessError> {
        self.estimators.iter().map(|s| s.build(cfg)).collect()
    }
}
