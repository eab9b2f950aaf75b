//! Domain types of the two-level normal model
//! `y_i | theta_i ~ N(theta_i, V)`, `theta_i ~ N(0, A)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Above this dimension `|y|²` is accumulated with compensated summation.
pub const COMPENSATED_SUM_THRESHOLD: usize = 10_000;

/// Dimension, sampling variance and (optionally) prior variance of the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    k: usize,
    v: f64,
    a: Option<f64>,
}

impl ModelConfig {
    pub fn new(k: usize, v: f64) -> Result<Self> {
        if k < 1 {
            return Err(Error::domain("k", "dimension must be at least 1"));
        }
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::domain("V", format!("sampling variance must be positive and finite, got {v}")));
        }
        Ok(Self { k, v, a: None })
    }

    pub fn with_prior_variance(self, a: f64) -> Result<Self> {
        if !(a.is_finite() && a >= 0.0) {
            return Err(Error::domain("A", format!("prior variance must be nonnegative and finite, got {a}")));
        }
        Ok(Self { a: Some(a), ..self })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    pub fn prior_variance(&self) -> Option<f64> {
        self.a
    }

    /// `B = V / (V + A)`, in `(0, 1]` whenever the prior variance is set.
    pub fn prior_shrinkage(&self) -> Option<f64> {
        self.a.map(|a| self.v / (self.v + a))
    }

    pub(crate) fn require_k_at_least(&self, min: usize) -> Result<()> {
        if self.k < min {
            return Err(Error::domain("k", format!("requires k >= {min}, got k = {}", self.k)));
        }
        Ok(())
    }
}

/// An observation together with its squared norm and `T = |y|² / (2V)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationStats {
    pub y: Vec<f64>,
    pub y_norm_sq: f64,
    pub t: f64,
}

impl ObservationStats {
    pub fn new(y: Vec<f64>, cfg: &ModelConfig) -> Result<Self> {
        if y.len() != cfg.k() {
            return Err(Error::domain(
                "y",
                format!("length {} does not match dimension k = {}", y.len(), cfg.k()),
            ));
        }
        if y.iter().any(|x| !x.is_finite()) {
            return Err(Error::domain("y", "components must be finite"));
        }
        let y_norm_sq = norm_sq(&y);
        let t = y_norm_sq / (2.0 * cfg.v());
        Ok(Self { y, y_norm_sq, t })
    }
}

/// Sum of squares; Neumaier-compensated for long vectors.
pub fn norm_sq(y: &[f64]) -> f64 {
    if y.len() <= COMPENSATED_SUM_THRESHOLD {
        return y.iter().map(|x| x * x).sum();
    }
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for x in y {
        let term = x * x;
        let next = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - next) + term;
        } else {
            comp += (term - next) + sum;
        }
        sum = next;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_invalid_configs() {
        assert!(ModelConfig::new(0, 1.0).is_err());
        assert!(ModelConfig::new(3, 0.0).is_err());
        assert!(ModelConfig::new(3, f64::NAN).is_err());
        assert!(ModelConfig::new(3, 1.0).unwrap().with_prior_variance(-1.0).is_err());
    }

    #[test]
    fn prior_shrinkage_in_unit_interval() {
        let cfg = ModelConfig::new(5, 2.0).unwrap();
        assert_eq!(cfg.prior_shrinkage(), None);
        assert_eq!(cfg.with_prior_variance(0.0).unwrap().prior_shrinkage(), Some(1.0));
        assert_eq!(cfg.with_prior_variance(2.0).unwrap().prior_shrinkage(), Some(0.5));
    }

    #[test]
    fn observation_stats() {
        let cfg = ModelConfig::new(3, 2.0).unwrap();
        let obs = ObservationStats::new(vec![1.0, 2.0, 2.0], &cfg).unwrap();
        assert_eq!(obs.y_norm_sq, 9.0);
        assert_eq!(obs.t, 9.0 / 4.0);
        assert!(ObservationStats::new(vec![1.0], &cfg).is_err());
    }

    #[test]
    fn compensated_norm_matches_exact_sum() {
        // 0.1² summed 20001 times; exact value computed from the f64 square.
        let y = vec![0.1_f64; 20_001];
        let sq = 0.1_f64 * 0.1;
        let exact = sq * 20_001.0;
        assert!((norm_sq(&y) - exact).abs() <= 4.0 * f64::EPSILON * exact);
    }
}
