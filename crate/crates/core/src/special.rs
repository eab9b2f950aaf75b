//! Chi-squared numerics: regularized incomplete gamma, central chi-squared
//! tails and the inverse moment of a noncentral chi-squared variable.

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

pub const DEFAULT_ABS_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_TERMS: usize = 100_000;

const TINY: f64 = 1e-300;

/// Tolerance and iteration cap for the chi-squared evaluations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquaredEngine {
    /// Truncation tolerance; for the inverse moment it is scaled by the
    /// partial sum, which never exceeds 1.
    pub abs_tol: f64,
    pub max_terms: usize,
}

impl Default for ChiSquaredEngine {
    fn default() -> Self {
        Self {
            abs_tol: DEFAULT_ABS_TOL,
            max_terms: DEFAULT_MAX_TERMS,
        }
    }
}

impl ChiSquaredEngine {
    pub fn new(abs_tol: f64, max_terms: usize) -> Result<Self> {
        if !(abs_tol.is_finite() && abs_tol > 0.0) {
            return Err(Error::domain("abs_tol", "must be positive and finite"));
        }
        if max_terms == 0 {
            return Err(Error::domain("max_terms", "must be at least 1"));
        }
        Ok(Self { abs_tol, max_terms })
    }

    /// `P(χ²_k ≤ x)`.
    pub fn lower_cdf(&self, k: usize, x: f64) -> Result<f64> {
        self.tails(k, x).map(|(lower, _)| lower)
    }

    /// `P(χ²_k ≥ x)`.
    pub fn upper_tail(&self, k: usize, x: f64) -> Result<f64> {
        self.tails(k, x).map(|(_, upper)| upper)
    }

    /// Both tails at once. Only the tail on the cheap side of the split is
    /// summed; the other is its complement, so the pair adds to one.
    pub fn tails(&self, k: usize, x: f64) -> Result<(f64, f64)> {
        if k == 0 {
            return Err(Error::domain("k", "degrees of freedom must be at least 1"));
        }
        if !x.is_finite() || x < 0.0 {
            return Err(Error::domain("x", format!("must be finite and nonnegative, got {x}")));
        }
        self.regularized_gamma(0.5 * k as f64, 0.5 * x)
    }

    /// Regularized incomplete gamma pair `(P(a, x), Q(a, x))` for `a > 0`, `x ≥ 0`.
    pub fn regularized_gamma(&self, a: f64, x: f64) -> Result<(f64, f64)> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::domain("a", format!("shape must be positive, got {a}")));
        }
        if !x.is_finite() || x < 0.0 {
            return Err(Error::domain("x", format!("must be finite and nonnegative, got {x}")));
        }
        if x == 0.0 {
            return Ok((0.0, 1.0));
        }
        let log_prefactor = -x + a * x.ln() - ln_gamma(a);
        if x < a + 1.0 {
            let p = self.lower_series(a, x, log_prefactor)?.clamp(0.0, 1.0);
            Ok((p, 1.0 - p))
        } else {
            let q = self.upper_continued_fraction(a, x, log_prefactor)?.clamp(0.0, 1.0);
            Ok((1.0 - q, q))
        }
    }

    /// `P(a, x) = x^a e^{-x} / Γ(a) · Σ x^n / (a (a+1) ... (a+n))`.
    fn lower_series(&self, a: f64, x: f64, log_prefactor: f64) -> Result<f64> {
        let mut denom = a;
        let mut term = 1.0 / a;
        let mut sum = term;
        for _ in 0..self.max_terms {
            denom += 1.0;
            term *= x / denom;
            sum += term;
            if term.abs() < sum.abs() * f64::EPSILON {
                return Ok((log_prefactor + sum.ln()).exp());
            }
        }
        Err(Error::Convergence {
            method: "incomplete gamma series",
            iterations: self.max_terms,
        })
    }

    /// Modified Lentz evaluation of the continued fraction for `Q(a, x)`.
    fn upper_continued_fraction(&self, a: f64, x: f64, log_prefactor: f64) -> Result<f64> {
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for n in 1..=self.max_terms {
            let n = n as f64;
            let an = -n * (n - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < TINY {
                d = TINY;
            }
            c = b + an / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < f64::EPSILON {
                return Ok((log_prefactor + h.ln()).exp());
            }
        }
        Err(Error::Convergence {
            method: "incomplete gamma continued fraction",
            iterations: self.max_terms,
        })
    }

    /// `E[1 / χ²_k(λ)]` from the Poisson mixture
    /// `Σ_j Pois(j; λ/2) / (k + 2j - 2)`.
    pub fn inverse_moment(&self, k: usize, lambda: f64) -> Result<f64> {
        if k <= 2 {
            return Err(Error::domain("k", format!("inverse moment is infinite for k = {k} (need k >= 3)")));
        }
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(Error::domain("lambda", format!("noncentrality must be finite and nonnegative, got {lambda}")));
        }
        let k = k as f64;
        if lambda == 0.0 {
            return Ok(1.0 / (k - 2.0));
        }
        let mean = 0.5 * lambda;
        let ln_mean = mean.ln();
        let term = |j: f64| (-mean + j * ln_mean - ln_gamma(j + 1.0)).exp() / (k + 2.0 * j - 2.0);
        // Sum outward from the Poisson mode so large λ costs O(√λ) terms. The
        // moment is at most 1/(k-2) ≤ 1, so the tolerance is applied relative
        // to the running sum.
        let mode = mean.floor();
        let mut sum = term(mode);
        let mut used = 1;
        let mut down_done = mode == 0.0;
        let mut up_done = false;
        let mut step = 1.0;
        while used < self.max_terms {
            if !down_done {
                let j = mode - step;
                let t = term(j);
                sum += t;
                used += 1;
                // Below the mode weight ratios are below j / mean and 1/(k+2i-2) ≤ 1/(k-2).
                let ratio = j / mean;
                let bound = (-mean + j * ln_mean - ln_gamma(j + 1.0)).exp() / (k - 2.0) * ratio / (1.0 - ratio);
                down_done = j == 0.0 || bound < 0.5 * self.abs_tol * sum;
            }
            if !up_done {
                let j = mode + step;
                let t = term(j);
                sum += t;
                used += 1;
                // Past the mode successive ratios are below mean / (j + 1).
                let ratio = mean / (j + 1.0);
                up_done = t * ratio / (1.0 - ratio) < 0.5 * self.abs_tol * sum;
            }
            if down_done && up_done {
                return Ok(sum);
            }
            step += 1.0;
        }
        Err(Error::Convergence {
            method: "inverse moment series",
            iterations: self.max_terms,
        })
    }
}

/// `P(χ²_k ≤ x)` with the default engine.
pub fn chisq_lower_cdf(k: usize, x: f64) -> Result<f64> {
    ChiSquaredEngine::default().lower_cdf(k, x)
}

/// `P(χ²_k ≥ x)` with the default engine.
pub fn chisq_upper_tail(k: usize, x: f64) -> Result<f64> {
    ChiSquaredEngine::default().upper_tail(k, x)
}

/// `E[1 / χ²_k(λ)]` with the default engine.
pub fn inverse_chisq_moment(k: usize, lambda: f64) -> Result<f64> {
    ChiSquaredEngine::default().inverse_moment(k, lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn cdf_at_zero_is_zero() {
        for k in [1, 2, 7, 100] {
            assert_eq!(chisq_lower_cdf(k, 0.0).unwrap(), 0.0);
            assert_eq!(chisq_upper_tail(k, 0.0).unwrap(), 1.0);
        }
    }

    #[test]
    fn two_dof_median() {
        let median = 2.0 * std::f64::consts::LN_2;
        assert_abs_diff_eq!(chisq_lower_cdf(2, median).unwrap(), 0.5, epsilon = 1e-14);
    }

    #[test]
    fn closed_forms_on_both_sides_of_split() {
        // χ²_2 is exponential; χ²_4 has P = 1 - e^{-x/2}(1 + x/2).
        for x in [0.1_f64, 1.0, 3.9, 4.1, 10.0, 60.0] {
            let e2 = 1.0 - (-0.5 * x).exp();
            assert_abs_diff_eq!(chisq_lower_cdf(2, x).unwrap(), e2, epsilon = 1e-13);
            let e4 = 1.0 - (-0.5 * x).exp() * (1.0 + 0.5 * x);
            assert_abs_diff_eq!(chisq_lower_cdf(4, x).unwrap(), e4, epsilon = 1e-13);
        }
    }

    #[test]
    fn domain_errors() {
        assert!(chisq_lower_cdf(0, 1.0).is_err());
        assert!(chisq_lower_cdf(3, -1.0).is_err());
        assert!(chisq_lower_cdf(3, f64::INFINITY).is_err());
        assert!(chisq_lower_cdf(3, f64::NAN).is_err());
        assert!(inverse_chisq_moment(2, 0.0).is_err());
        assert!(inverse_chisq_moment(5, -1.0).is_err());
    }

    #[test]
    fn central_inverse_moment() {
        assert_eq!(inverse_chisq_moment(10, 0.0).unwrap(), 0.125);
        assert_eq!(inverse_chisq_moment(4, 0.0).unwrap(), 0.5);
    }

    #[test]
    fn inverse_moment_high_noncentrality() {
        // For large λ, E[1/χ²_k(λ)] ≈ 1/(k + λ - 2) to leading order.
        let v = inverse_chisq_moment(10, 4000.0).unwrap();
        assert!((v * 4008.0 - 1.0).abs() < 1e-3, "{v}");
    }

    #[test]
    fn inverse_moment_very_large_noncentrality() {
        // Delta-method expansion 1/μ + Var/μ³ with μ = k + λ, Var = 2k + 4λ;
        // the next term is O(λ⁻³).
        let (k, lambda) = (10usize, 1e6);
        let mu = k as f64 + lambda;
        let approx = 1.0 / mu + (2.0 * k as f64 + 4.0 * lambda) / mu.powi(3);
        let v = inverse_chisq_moment(k, lambda).unwrap();
        assert!((v - approx).abs() < 1e-9 * approx, "{v} vs {approx}");
    }

    #[test]
    fn doubling_max_terms_is_stable() {
        let base = ChiSquaredEngine::default();
        let doubled = ChiSquaredEngine::new(base.abs_tol, 2 * base.max_terms).unwrap();
        for (k, lambda) in [(3, 0.5), (10, 25.0), (40, 300.0)] {
            let a = base.inverse_moment(k, lambda).unwrap();
            let b = doubled.inverse_moment(k, lambda).unwrap();
            assert!((a - b).abs() <= base.abs_tol);
        }
        for (k, x) in [(3, 0.5), (10, 16.0), (200, 190.0)] {
            let a = base.lower_cdf(k, x).unwrap();
            let b = doubled.lower_cdf(k, x).unwrap();
            assert!((a - b).abs() <= base.abs_tol);
        }
    }

    #[test]
    fn too_few_terms_reports_convergence_failure() {
        let eng = ChiSquaredEngine::new(1e-12, 3).unwrap();
        assert!(matches!(eng.inverse_moment(10, 50.0), Err(Error::Convergence { .. })));
    }

    proptest! {
        #[test]
        fn tails_sum_to_one(k in 1usize..300, x in 0.0f64..600.0) {
            let eng = ChiSquaredEngine::default();
            let (lo, up) = eng.tails(k, x).unwrap();
            prop_assert!((0.0..=1.0).contains(&lo));
            prop_assert!((lo + up - 1.0).abs() <= 2.0 * eng.abs_tol);
        }

        #[test]
        fn cdf_is_monotone(k in 1usize..200, x1 in 0.0f64..400.0, dx in 0.0f64..50.0) {
            let lo1 = chisq_lower_cdf(k, x1).unwrap();
            let lo2 = chisq_lower_cdf(k, x1 + dx).unwrap();
            prop_assert!(lo1 <= lo2 + 1e-15);
        }

        #[test]
        fn inverse_moment_decreases_in_lambda(k in 3usize..60, l1 in 0.0f64..200.0, dl in 0.01f64..20.0) {
            let a = inverse_chisq_moment(k, l1).unwrap();
            let b = inverse_chisq_moment(k, l1 + dl).unwrap();
            prop_assert!(b < a);
        }
    }
}
