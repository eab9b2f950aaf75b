//! Spherically symmetric shrinkage rules `δ(y) = (1 - B(|y|²)) y`.
//!
//! Every estimator is described by its scalar shrink factor `B`; the vector
//! rule is derived from it, so all rules here are orthogonally equivariant.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{norm_sq, ModelConfig};

/// Caller-supplied shrink factor `B(|y|², cfg)`.
pub type ShrinkFn = Arc<dyn Fn(f64, &ModelConfig) -> Result<f64> + Send + Sync>;

/// Parameters of the ADM shrinker (the `r = 0` case).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmParams {
    m: f64,
    c: f64,
}

impl AdmParams {
    pub fn new(m: f64, c: f64) -> Result<Self> {
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::domain("m", format!("must be positive and finite, got {m}")));
        }
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::domain("c", format!("must be positive and finite, got {c}")));
        }
        if m - c + 1.0 <= 0.0 {
            return Err(Error::domain("m", format!("m - c + 1 must be positive, got m = {m}, c = {c}")));
        }
        Ok(Self { m, c })
    }

    /// `m = (k - 2) / 2`, `c = 1`.
    pub fn default_for(cfg: &ModelConfig) -> Result<Self> {
        cfg.require_k_at_least(3)?;
        Self::new((cfg.k() as f64 - 2.0) / 2.0, 1.0)
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// `m - c + 1`, the large-`T` limit of the bracketed function.
    pub fn bracket_limit(&self) -> f64 {
        self.m - self.c + 1.0
    }

    /// `(m - c + 1) / (m + 1)`, the `T → 0⁺` limit of the shrink factor.
    pub fn shrink_at_origin(&self) -> f64 {
        self.bracket_limit() / (self.m + 1.0)
    }

    fn denominator(&self, t: f64) -> f64 {
        let d = t - self.m - 1.0;
        t + self.m + 1.0 + (d * d + 4.0 * self.c * t).sqrt()
    }
}

fn check_t(t: f64) -> Result<()> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::domain("T", format!("must be positive and finite, got {t}")));
    }
    Ok(())
}

/// `2 (m - c + 1) T / (T + m + 1 + sqrt((T - m - 1)² + 4cT))`.
pub fn adm_bracket(t: f64, p: &AdmParams) -> Result<f64> {
    check_t(t)?;
    Ok(2.0 * p.bracket_limit() * t / p.denominator(t))
}

/// ADM shrink factor `B̂(T)` = bracket / T, evaluated without the
/// cancelling `T` so that it stays accurate as `T → 0⁺`.
pub fn adm_shrink_factor(t: f64, p: &AdmParams) -> Result<f64> {
    check_t(t)?;
    Ok(2.0 * p.bracket_limit() / p.denominator(t))
}

/// James–Stein shrink factor `V (k - 2) / |y|²`; exceeds one for `|y|² < V (k - 2)`.
pub fn js_shrink_factor(y_norm_sq: f64, cfg: &ModelConfig) -> Result<f64> {
    cfg.require_k_at_least(3)?;
    if y_norm_sq.is_nan() || y_norm_sq < 0.0 {
        return Err(Error::domain("y_norm_sq", format!("must be nonnegative, got {y_norm_sq}")));
    }
    if y_norm_sq == 0.0 {
        return Err(Error::SingularInput("James-Stein shrink factor is undefined at y = 0".into()));
    }
    Ok(cfg.v() * (cfg.k() as f64 - 2.0) / y_norm_sq)
}

/// `max(0, 1 - V (k - 2) / |y|²)`, with total shrinkage at `y = 0`.
pub fn positive_part_shrink_coefficient(y_norm_sq: f64, cfg: &ModelConfig) -> Result<f64> {
    cfg.require_k_at_least(3)?;
    if y_norm_sq == 0.0 {
        return Ok(0.0);
    }
    Ok((1.0 - js_shrink_factor(y_norm_sq, cfg)?).max(0.0))
}

#[derive(Clone)]
pub enum EstimatorKind {
    JamesStein,
    PositivePartJs,
    Adm(AdmParams),
    Mle,
    Custom(ShrinkFn),
}

impl fmt::Debug for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EstimatorKind::JamesStein => f.write_str("JamesStein"),
            EstimatorKind::PositivePartJs => f.write_str("PositivePartJs"),
            EstimatorKind::Adm(p) => f.debug_tuple("Adm").field(p).finish(),
            EstimatorKind::Mle => f.write_str("Mle"),
            EstimatorKind::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// A named shrinkage rule.
#[derive(Debug, Clone)]
pub struct ShrinkageEstimator {
    name: String,
    kind: EstimatorKind,
}

impl ShrinkageEstimator {
    pub fn new(name: impl Into<String>, kind: EstimatorKind) -> Self {
        Self {
            name: name.into(),
            kind,
        }
    }

    pub fn james_stein() -> Self {
        Self::new("JS", EstimatorKind::JamesStein)
    }

    pub fn positive_part() -> Self {
        Self::new("JS+", EstimatorKind::PositivePartJs)
    }

    pub fn mle() -> Self {
        Self::new("MLE", EstimatorKind::Mle)
    }

    /// Named `ADM(m=..,c=..)`.
    pub fn adm(params: AdmParams) -> Self {
        Self::new(
            format!("ADM(m={},c={})", format_param(params.m), format_param(params.c)),
            EstimatorKind::Adm(params),
        )
    }

    pub fn custom(name: impl Into<String>, shrink: ShrinkFn) -> Self {
        Self::new(name, EstimatorKind::Custom(shrink))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> &EstimatorKind {
        &self.kind
    }

    pub fn adm_params(&self) -> Option<&AdmParams> {
        match &self.kind {
            EstimatorKind::Adm(p) => Some(p),
            _ => None,
        }
    }

    /// Scalar shrink factor `B(|y|²)`.
    ///
    /// At `y = 0` the positive-part rule returns 1 and ADM returns its limit
    /// `(m - c + 1) / (m + 1)`; James–Stein is singular there.
    pub fn shrink_factor(&self, y_norm_sq: f64, cfg: &ModelConfig) -> Result<f64> {
        if y_norm_sq.is_nan() || y_norm_sq < 0.0 {
            return Err(Error::domain("y_norm_sq", format!("must be nonnegative, got {y_norm_sq}")));
        }
        match &self.kind {
            EstimatorKind::JamesStein => js_shrink_factor(y_norm_sq, cfg),
            EstimatorKind::PositivePartJs => Ok(1.0 - positive_part_shrink_coefficient(y_norm_sq, cfg)?),
            EstimatorKind::Adm(p) => {
                if y_norm_sq == 0.0 {
                    Ok(p.shrink_at_origin())
                } else {
                    adm_shrink_factor(y_norm_sq / (2.0 * cfg.v()), p)
                }
            }
            EstimatorKind::Mle => Ok(0.0),
            EstimatorKind::Custom(shrink) => shrink(y_norm_sq, cfg),
        }
    }

    /// Multiplier `1 - B(|y|²)` applied to `y`.
    pub fn coefficient(&self, y_norm_sq: f64, cfg: &ModelConfig) -> Result<f64> {
        Ok(1.0 - self.shrink_factor(y_norm_sq, cfg)?)
    }

    /// `δ(y) = (1 - B) y`.
    pub fn estimate(&self, y: &[f64], cfg: &ModelConfig) -> Result<Vec<f64>> {
        if y.len() != cfg.k() {
            return Err(Error::domain(
                "y",
                format!("length {} does not match dimension k = {}", y.len(), cfg.k()),
            ));
        }
        if let EstimatorKind::Mle = self.kind {
            return Ok(y.to_vec());
        }
        let y_norm_sq = norm_sq(y);
        if y_norm_sq == 0.0 && !matches!(self.kind, EstimatorKind::JamesStein) {
            return Ok(vec![0.0; y.len()]);
        }
        let coef = self.coefficient(y_norm_sq, cfg)?;
        Ok(y.iter().map(|x| coef * x).collect())
    }

    /// The `g` for which `δ(y) = (1 - V g / |y|²) y`, i.e. `B |y|² / V`.
    pub fn g_of_theorem(&self, y_norm_sq: f64, cfg: &ModelConfig) -> Result<f64> {
        if !(y_norm_sq > 0.0) {
            return Err(Error::domain("y_norm_sq", format!("must be positive, got {y_norm_sq}")));
        }
        if let EstimatorKind::Adm(p) = &self.kind {
            // 2 × bracket, without dividing and re-multiplying by T.
            return Ok(2.0 * adm_bracket(y_norm_sq / (2.0 * cfg.v()), p)?);
        }
        Ok(self.shrink_factor(y_norm_sq, cfg)? * y_norm_sq / cfg.v())
    }
}

pub(crate) fn format_param(x: f64) -> String {
    let s = format!("{x:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}
