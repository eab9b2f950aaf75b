//! Numerical certification of Baranchik's sufficient conditions for
//! minimaxity of `δ(y) = (1 - V g(|y|) / |y|²) y`:
//! `g` nondecreasing and `0 ≤ g ≤ 2(k - 2)`.

use std::fmt;

use crate::error::{Error, Result};
use crate::model::ModelConfig;
use crate::shrinkage::{EstimatorKind, ShrinkageEstimator};

/// Relative slack for adjacent-pair monotonicity comparisons.
pub const MONOTONE_SLACK: f64 = 1e-12;

/// Minimum density and span a certification grid must have.
pub const MIN_GRID_POINTS: usize = 1_000;
pub const MAX_GRID_START: f64 = 1e-6;
pub const MIN_GRID_END: f64 = 1e8;

/// Geometrically spaced grid `min, ..., max` with `points` nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Default for LogGrid {
    fn default() -> Self {
        Self {
            min: MAX_GRID_START,
            max: MIN_GRID_END,
            points: 2_000,
        }
    }
}

impl LogGrid {
    pub fn new(min: f64, max: f64, points: usize) -> Result<Self> {
        if !(min.is_finite() && min > 0.0 && max.is_finite() && max > min) {
            return Err(Error::domain("grid", format!("need 0 < min < max, got [{min}, {max}]")));
        }
        if points < 2 {
            return Err(Error::domain("grid", "need at least two points"));
        }
        Ok(Self { min, max, points })
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        let (lo, hi) = (self.min.ln(), self.max.ln());
        let n = self.points - 1;
        (0..self.points).map(move |i| {
            if i == n {
                self.max
            } else {
                (lo + (hi - lo) * i as f64 / n as f64).exp()
            }
        })
    }

    fn require_certification_span(&self) -> Result<()> {
        if self.points < MIN_GRID_POINTS || self.min > MAX_GRID_START || self.max < MIN_GRID_END {
            return Err(Error::domain(
                "grid",
                format!(
                    "certification needs >= {MIN_GRID_POINTS} points over at least [{MAX_GRID_START:e}, {MIN_GRID_END:e}], got {} points over [{:e}, {:e}]",
                    self.points, self.min, self.max
                ),
            ));
        }
        Ok(())
    }
}

impl fmt::Display for LogGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "log[{:e},{:e}]x{}", self.min, self.max, self.points)
    }
}

/// ADM-only comparison of the two ways of matching the shrinker to `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct BracketReading {
    /// Supremum of the bracketed function alone (limit `m - c + 1`).
    pub bracket_sup: f64,
    /// Verdict if the bracket itself is taken as `g`.
    pub bracket_certified: bool,
    /// Largest `m` certified under `g = 2 × bracket`: `k - 3 + c`.
    pub direct_m_limit: f64,
    /// Largest `m` certified under `g = bracket`: `2(k - 2) + c - 1`.
    pub bracket_m_limit: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaranchikReport {
    pub estimator_name: String,
    pub k: usize,
    pub grid: LogGrid,
    pub nondecreasing: bool,
    pub min_g: f64,
    pub sup_g: f64,
    pub bound: f64,
    pub certified: bool,
    pub bracket_note: Option<BracketReading>,
}

impl BaranchikReport {
    pub fn note_text(&self) -> Option<String> {
        self.bracket_note.as_ref().map(|n| {
            format!(
                "g = B|y|^2/V = 2 x bracket; bracket sup = {} ({} bound {} when the bracket itself is read as g); \
                 m <= {} certifies under g = 2 x bracket, m <= {} under g = bracket",
                n.bracket_sup,
                if n.bracket_certified { "within" } else { "exceeds" },
                self.bound,
                n.direct_m_limit,
                n.bracket_m_limit
            )
        })
    }

    pub const CSV_HEADER: &'static str = "estimator,k,grid,nondecreasing,min_g,sup_g,bound,certified,note";

    pub fn csv_row(&self) -> String {
        let note = self.note_text().unwrap_or_default().replace('"', "'");
        format!(
            "{},{},{},{},{:.16e},{:.16e},{},{},\"{}\"",
            self.estimator_name,
            self.k,
            self.grid,
            self.nondecreasing,
            self.min_g,
            self.sup_g,
            self.bound,
            self.certified,
            note
        )
    }
}

impl fmt::Display for BaranchikReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "estimator = {}", self.estimator_name)?;
        writeln!(f, "k = {}", self.k)?;
        writeln!(f, "grid = {}", self.grid)?;
        writeln!(f, "nondecreasing = {}", self.nondecreasing)?;
        writeln!(f, "min_g = {}", self.min_g)?;
        writeln!(f, "sup_g = {}", self.sup_g)?;
        writeln!(f, "bound = {}", self.bound)?;
        writeln!(f, "certified = {}", self.certified)?;
        if let Some(note) = self.note_text() {
            writeln!(f, "note = {note}")?;
        }
        Ok(())
    }
}

fn grid_error(est: &ShrinkageEstimator, t: f64, source: Error) -> Error {
    Error::GridEvaluation {
        estimator: est.name().to_string(),
        t,
        source: Box::new(source),
    }
}

/// Evaluates `g` over a log grid in `T = |y|² / (2V)` and checks the two conditions.
pub fn certify(est: &ShrinkageEstimator, cfg: &ModelConfig, grid: &LogGrid) -> Result<BaranchikReport> {
    cfg.require_k_at_least(3)?;
    grid.require_certification_span()?;
    let g_at = |t: f64| {
        est.g_of_theorem(2.0 * cfg.v() * t, cfg)
            .map_err(|e| grid_error(est, t, e))
            .and_then(|g| {
                if g.is_finite() {
                    Ok(g)
                } else {
                    Err(grid_error(est, t, Error::domain("g", "non-finite value")))
                }
            })
    };

    let mut nondecreasing = true;
    let mut min_g = f64::INFINITY;
    let mut sup_g = f64::NEG_INFINITY;
    let mut prev: Option<f64> = None;
    for t in grid.values() {
        let g = g_at(t)?;
        if let Some(p) = prev {
            if g < p - MONOTONE_SLACK * (1.0 + p.abs()) {
                nondecreasing = false;
            }
        }
        min_g = min_g.min(g);
        sup_g = sup_g.max(g);
        prev = Some(g);
    }
    // Numerical limit beyond the grid.
    let tail = g_at(10.0 * grid.max)?;
    if let Some(p) = prev {
        if tail < p - MONOTONE_SLACK * (1.0 + p.abs()) {
            nondecreasing = false;
        }
    }
    min_g = min_g.min(tail);
    sup_g = sup_g.max(tail);

    let k = cfg.k() as f64;
    let bound = 2.0 * (k - 2.0);
    let bracket_note = match est.kind() {
        EstimatorKind::Adm(p) => {
            sup_g = sup_g.max(2.0 * p.bracket_limit());
            let bracket_sup = p.bracket_limit();
            Some(BracketReading {
                bracket_sup,
                bracket_certified: nondecreasing && bracket_sup <= bound,
                direct_m_limit: k - 3.0 + p.c(),
                bracket_m_limit: bound + p.c() - 1.0,
            })
        }
        EstimatorKind::JamesStein => {
            sup_g = sup_g.max(k - 2.0);
            None
        }
        _ => None,
    };
    let certified = nondecreasing && min_g >= 0.0 && sup_g <= bound;
    Ok(BaranchikReport {
        estimator_name: est.name().to_string(),
        k: cfg.k(),
        grid: *grid,
        nondecreasing,
        min_g,
        sup_g,
        bound,
        certified,
        bracket_note,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignAudit {
    pub min_coefficient: f64,
    pub max_coefficient: f64,
    pub reverses_sign: bool,
}

/// Range of the coefficient `1 - B` over a log grid in `|y|²`.
pub fn shrinker_sign_audit(est: &ShrinkageEstimator, cfg: &ModelConfig, grid: &LogGrid) -> Result<SignAudit> {
    cfg.require_k_at_least(3)?;
    grid.require_certification_span()?;
    let mut min_coefficient = f64::INFINITY;
    let mut max_coefficient = f64::NEG_INFINITY;
    for s in grid.values() {
        let c = est
            .coefficient(s, cfg)
            .map_err(|e| grid_error(est, s / (2.0 * cfg.v()), e))?;
        min_coefficient = min_coefficient.min(c);
        max_coefficient = max_coefficient.max(c);
    }
    Ok(SignAudit {
        min_coefficient,
        max_coefficient,
        reverses_sign: min_coefficient < 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shrinkage::AdmParams;
    use std::sync::Arc;

    fn k10() -> ModelConfig {
        ModelConfig::new(10, 1.0).unwrap()
    }

    #[test]
    fn js_certifies() {
        let r = certify(&ShrinkageEstimator::james_stein(), &k10(), &LogGrid::default()).unwrap();
        assert!(r.nondecreasing);
        assert!((r.sup_g - 8.0).abs() < 1e-12);
        assert_eq!(r.bound, 16.0);
        assert!(r.certified);
        assert!(r.bracket_note.is_none());

        let k3 = ModelConfig::new(3, 1.0).unwrap();
        let r = certify(&ShrinkageEstimator::james_stein(), &k3, &LogGrid::default()).unwrap();
        assert!((r.sup_g - 1.0).abs() < 1e-12);
        assert_eq!(r.bound, 2.0);
        assert!(r.certified);
    }

    #[test]
    fn adm_default_certifies() {
        let est = ShrinkageEstimator::adm(AdmParams::new(4.0, 1.0).unwrap());
        let r = certify(&est, &k10(), &LogGrid::default()).unwrap();
        assert!(r.nondecreasing);
        assert_eq!(r.sup_g, 8.0);
        assert!(r.certified);
        let note = r.bracket_note.unwrap();
        assert_eq!(note.bracket_sup, 4.0);
        assert_eq!(note.direct_m_limit, 8.0);
        assert_eq!(note.bracket_m_limit, 16.0);
    }

    #[test]
    fn adm_large_m_fails() {
        let est = ShrinkageEstimator::adm(AdmParams::new(20.0, 1.0).unwrap());
        let r = certify(&est, &k10(), &LogGrid::default()).unwrap();
        assert_eq!(r.sup_g, 40.0);
        assert!(!r.certified);
        assert!(!r.bracket_note.unwrap().bracket_certified);
    }

    #[test]
    fn readings_disagree_between_limits() {
        // m = 12: 2(m - c + 1) = 24 > 16 but the bracket alone is 12 <= 16.
        let est = ShrinkageEstimator::adm(AdmParams::new(12.0, 1.0).unwrap());
        let r = certify(&est, &k10(), &LogGrid::default()).unwrap();
        assert!(!r.certified);
        assert!(r.bracket_note.as_ref().unwrap().bracket_certified);
        assert!(r.note_text().unwrap().contains("m <= 8"));
    }

    #[test]
    fn decreasing_custom_rule_fails_monotonicity() {
        // g(|y|²) = 4 / (1 + |y|²) is decreasing and bounded.
        let est = ShrinkageEstimator::custom("decreasing", Arc::new(|s, cfg: &ModelConfig| Ok(4.0 * cfg.v() / (s * (1.0 + s)))));
        let r = certify(&est, &k10(), &LogGrid::default()).unwrap();
        assert!(!r.nondecreasing);
        assert!(!r.certified);
    }

    #[test]
    fn failing_custom_rule_reports_t() {
        let est = ShrinkageEstimator::custom(
            "broken",
            Arc::new(|s, _: &ModelConfig| {
                if s > 1.0 {
                    Err(Error::domain("y_norm_sq", "too large"))
                } else {
                    Ok(0.0)
                }
            }),
        );
        match certify(&est, &k10(), &LogGrid::default()) {
            Err(Error::GridEvaluation { t, .. }) => assert!(t > 0.5 && t < 0.6),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn grid_requirements() {
        let est = ShrinkageEstimator::james_stein();
        assert!(certify(&est, &k10(), &LogGrid::new(1e-6, 1e8, 10).unwrap()).is_err());
        assert!(certify(&est, &k10(), &LogGrid::new(1e-3, 1e8, 5000).unwrap()).is_err());
        assert!(certify(&est, &ModelConfig::new(2, 1.0).unwrap(), &LogGrid::default()).is_err());
        assert!(LogGrid::new(1.0, 0.5, 10).is_err());
    }

    #[test]
    fn sign_audits() {
        let cfg = k10();
        let grid = LogGrid::new(1e-6, 1e8, 10_000).unwrap();
        let js = shrinker_sign_audit(&ShrinkageEstimator::james_stein(), &cfg, &grid).unwrap();
        assert!(js.reverses_sign);
        let pp = shrinker_sign_audit(&ShrinkageEstimator::positive_part(), &cfg, &grid).unwrap();
        assert_eq!(pp.min_coefficient, 0.0);
        assert!(!pp.reverses_sign);
        let adm = shrinker_sign_audit(&ShrinkageEstimator::adm(AdmParams::new(4.0, 1.0).unwrap()), &cfg, &grid).unwrap();
        assert!(adm.min_coefficient >= 0.2);
        assert!(!adm.reverses_sign);
    }

    #[test]
    fn verdict_stable_under_grid_doubling() {
        let cfg = k10();
        for est in [
            ShrinkageEstimator::james_stein(),
            ShrinkageEstimator::adm(AdmParams::new(4.0, 1.0).unwrap()),
            ShrinkageEstimator::adm(AdmParams::new(20.0, 1.0).unwrap()),
            ShrinkageEstimator::adm(AdmParams::new(0.8, 1.0).unwrap()),
        ] {
            let a = certify(&est, &cfg, &LogGrid::new(1e-6, 1e8, 1_000).unwrap()).unwrap();
            let b = certify(&est, &cfg, &LogGrid::new(1e-6, 1e8, 2_000).unwrap()).unwrap();
            assert_eq!(a.certified, b.certified, "{}", est.name());
            assert_eq!(a.nondecreasing, b.nondecreasing);
        }
    }
}
