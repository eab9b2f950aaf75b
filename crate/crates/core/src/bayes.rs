//! The generalized-Bayes calculation behind the James–Stein factor under a
//! uniform prior on `A` over `(-V, ∞)`, and the divergence of that prior.
//!
//! With `t = 1/(V + A)` the posterior expectation of `B = V/(V + A)` splits
//! into two chi-squared tail pieces: `A ∈ (-V, 0)` contributes
//! `P(χ²_k ≥ |y|²/V)` and `A ∈ (0, ∞)` contributes `P(χ²_k ≤ |y|²/V)`.

use std::f64::consts::{LN_2, PI};

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::model::ModelConfig;
use crate::quadrature::AdaptiveQuadrature;
use crate::special::ChiSquaredEngine;

/// Offset of the probe's left endpoint from `A = -V`, relative to `eps`.
pub const PROBE_LEFT_OFFSET: f64 = 1e-3;

/// Log-scale drop at which a decaying integrand is truncated.
const TRUNCATION_LOG_DROP: f64 = 80.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PosteriorDecomposition {
    /// `P(χ²_k ≥ |y|²/V)`, the piece from `A ∈ (-V, 0)`.
    pub upper_piece: f64,
    /// `P(χ²_k ≤ |y|²/V)`, the piece from `A ∈ (0, ∞)`.
    pub lower_piece: f64,
    /// `V Γ(k/2) 2^{k/2} / (|y|²)^{k/2}`; may overflow for large `k`, see the log field.
    pub common_factor: f64,
    pub log_common_factor: f64,
    /// `Γ(k/2 - 1) 2^{k/2 - 1} / (|y|²)^{k/2 - 1}`.
    pub normalizer: f64,
    pub log_normalizer: f64,
    /// `common_factor · (upper + lower) / normalizer`.
    pub normalized_eb: f64,
}

impl PosteriorDecomposition {
    pub fn closed_form(y_norm_sq: f64, cfg: &ModelConfig) -> f64 {
        cfg.v() * (cfg.k() as f64 - 2.0) / y_norm_sq
    }
}

fn check_positive(field: &'static str, x: f64) -> Result<()> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::domain(field, format!("must be positive and finite, got {x}")));
    }
    Ok(())
}

/// Decomposes `E(B | y)` into its two chi-squared pieces and normalizes it.
pub fn posterior_shrink_decomposition(y_norm_sq: f64, cfg: &ModelConfig) -> Result<PosteriorDecomposition> {
    posterior_shrink_decomposition_with(y_norm_sq, cfg, &ChiSquaredEngine::default())
}

pub fn posterior_shrink_decomposition_with(
    y_norm_sq: f64,
    cfg: &ModelConfig,
    engine: &ChiSquaredEngine,
) -> Result<PosteriorDecomposition> {
    check_positive("y_norm_sq", y_norm_sq)?;
    cfg.require_k_at_least(3)?;
    let half_k = 0.5 * cfg.k() as f64;
    let ln_s = y_norm_sq.ln();
    let log_common_factor = cfg.v().ln() + ln_gamma(half_k) + half_k * LN_2 - half_k * ln_s;
    let log_normalizer = ln_gamma(half_k - 1.0) + (half_k - 1.0) * LN_2 - (half_k - 1.0) * ln_s;
    let (lower_piece, upper_piece) = engine.tails(cfg.k(), y_norm_sq / cfg.v())?;
    let normalized_eb = (log_common_factor - log_normalizer).exp() * (upper_piece + lower_piece);
    Ok(PosteriorDecomposition {
        upper_piece,
        lower_piece,
        common_factor: log_common_factor.exp(),
        log_common_factor,
        normalizer: log_normalizer.exp(),
        log_normalizer,
        normalized_eb,
    })
}

/// The two pieces computed directly as integrals over `t = 1/(V + A)`,
/// `V ∫ t^{k/2-1} e^{-t|y|²/2} dt` on `(1/V, ∞)` and `(0, 1/V)`, divided by
/// the common factor.
pub fn posterior_pieces_by_quadrature(y_norm_sq: f64, cfg: &ModelConfig) -> Result<(f64, f64)> {
    check_positive("y_norm_sq", y_norm_sq)?;
    cfg.require_k_at_least(3)?;
    let half_k = 0.5 * cfg.k() as f64;
    let v = cfg.v();
    let log_cf = v.ln() + ln_gamma(half_k) + half_k * LN_2 - half_k * y_norm_sq.ln();
    let log_integrand = move |t: f64| v.ln() + (half_k - 1.0) * t.ln() - 0.5 * t * y_norm_sq - log_cf;
    let integrand = move |t: f64| if t <= 0.0 { 0.0 } else { log_integrand(t).exp() };

    let split = 1.0 / v;
    let mode = (cfg.k() as f64 - 2.0) / y_norm_sq;
    let peak = log_integrand(mode.max(split));
    let mut t_hi = 2.0 * mode.max(split);
    while log_integrand(t_hi) > peak - TRUNCATION_LOG_DROP {
        t_hi *= 2.0;
    }
    let quad = AdaptiveQuadrature::new(1e-13, 1e-300, 1_000_000, 10);

    let mut upper_breaks = vec![split];
    if mode > split {
        upper_breaks.push(mode);
    }
    upper_breaks.push(t_hi);
    let upper = quad.integrate_with_breaks(integrand, &upper_breaks)?.value;

    let mut lower_breaks = vec![0.0];
    if mode < split && mode > 0.0 {
        lower_breaks.push(mode);
    }
    lower_breaks.push(split);
    let lower = quad.integrate_with_breaks(integrand, &lower_breaks)?.value;
    Ok((upper, lower))
}

/// Mean and variance of `θ | y, A ~ N((1 - B) y, V (1 - B))`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalPosterior {
    pub mean: Vec<f64>,
    pub variance: f64,
}

pub fn conditional_posterior_params(y: &[f64], a: f64, cfg: &ModelConfig) -> Result<ConditionalPosterior> {
    if y.len() != cfg.k() {
        return Err(Error::domain(
            "y",
            format!("length {} does not match dimension k = {}", y.len(), cfg.k()),
        ));
    }
    if !(a.is_finite() && a >= 0.0) {
        return Err(Error::domain("A", format!("must be nonnegative and finite, got {a}")));
    }
    let b = cfg.v() / (cfg.v() + a);
    Ok(ConditionalPosterior {
        mean: y.iter().map(|x| (1.0 - b) * x).collect(),
        variance: cfg.v() * (1.0 - b),
    })
}

/// Partial integral of the prior density of `θ` over `A ∈ (-V + δ₀, -eps)`.
///
/// The magnitude overflows `f64` already for moderate `eps`, so it is kept
/// as a logarithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeResult {
    pub eps: f64,
    /// `ln ∫ e^{|θ|²/(2|A|)} / (2π|A|)^{k/2} dA`.
    pub log_magnitude: f64,
    /// Sign of the integrand on `A < 0`, `(-1)^{k/2}`.
    pub sign: i8,
}

impl ProbeResult {
    /// The magnitude itself; `inf` once it exceeds `f64::MAX`.
    pub fn magnitude(&self) -> f64 {
        self.log_magnitude.exp()
    }
}

/// Sign of `1 / A^{k/2}` for `A < 0` and even `k`.
pub fn negative_branch_sign(k: usize) -> i8 {
    if (k / 2).is_multiple_of(2) {
        1
    } else {
        -1
    }
}

pub fn improper_prior_probe(theta_norm_sq: f64, cfg: &ModelConfig, eps: f64) -> Result<ProbeResult> {
    check_positive("theta_norm_sq", theta_norm_sq)?;
    let k = cfg.k();
    if !k.is_multiple_of(2) {
        return Err(Error::domain("k", format!("the probe needs even k to stay real-valued, got k = {k}")));
    }
    cfg.require_k_at_least(4)?;
    let v = cfg.v();
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::domain("eps", format!("must be positive, got {eps}")));
    }
    let left = v - eps * PROBE_LEFT_OFFSET;
    if eps >= v || eps >= left {
        return Err(Error::domain("eps", format!("must be below V = {v}, got {eps}")));
    }

    // With u = 1/|A| the magnitude is ∫ e^{s u/2} u^{k/2-2} (2π)^{-k/2} du over
    // (1/left, 1/eps); the log integrand is increasing, so scale by its value at 1/eps.
    let half_k = 0.5 * k as f64;
    let s = theta_norm_sq;
    let log_integrand = move |u: f64| 0.5 * s * u + (half_k - 2.0) * u.ln() - half_k * (2.0 * PI).ln();
    let u_lo = 1.0 / left;
    let u_hi = 1.0 / eps;
    let peak = log_integrand(u_hi);
    let scaled = move |u: f64| (log_integrand(u) - peak).exp();

    let mut breaks = vec![u_lo];
    let bulk = u_hi - 2.0 * TRUNCATION_LOG_DROP / s;
    if bulk > u_lo {
        breaks.push(bulk);
    }
    breaks.push(u_hi);
    let quad = AdaptiveQuadrature::default();
    let r = quad.integrate_with_breaks(scaled, &breaks)?;
    Ok(ProbeResult {
        eps,
        log_magnitude: peak + r.value.ln(),
        sign: negative_branch_sign(k),
    })
}

/// `∫_0^{upper_cut} e^{-|θ|²/(2A)} / (2πA)^{k/2} dA`, the same prior mass
/// over the positive branch, which stays bounded as the cut grows.
pub fn positive_branch_integral(theta_norm_sq: f64, cfg: &ModelConfig, upper_cut: f64) -> Result<f64> {
    check_positive("theta_norm_sq", theta_norm_sq)?;
    check_positive("upper_cut", upper_cut)?;
    cfg.require_k_at_least(3)?;
    let half_k = 0.5 * cfg.k() as f64;
    let s = theta_norm_sq;
    // u = 1/A: ∫_{1/cut}^∞ e^{-s u/2} u^{k/2-2} (2π)^{-k/2} du.
    let log_integrand = move |u: f64| -0.5 * s * u + (half_k - 2.0) * u.ln() - half_k * (2.0 * PI).ln();
    let u_lo = 1.0 / upper_cut;
    let mode = ((2.0 * half_k - 4.0) / s).max(u_lo);
    let peak = log_integrand(mode);
    let mut u_hi = 2.0 * mode.max(1.0 / s);
    while log_integrand(u_hi) > peak - TRUNCATION_LOG_DROP {
        u_hi *= 2.0;
    }
    let scaled = move |u: f64| (log_integrand(u) - peak).exp();
    let mut breaks = vec![u_lo];
    if mode > u_lo {
        breaks.push(mode);
    }
    breaks.push(u_hi);
    let quad = AdaptiveQuadrature::new(1e-13, 0.0, 1_000_000, 10);
    let r = quad.integrate_with_breaks(scaled, &breaks)?;
    Ok(peak.exp() * r.value)
}
