//! Monte Carlo risk `R(θ, δ) = E|θ - δ(y)|²` over a grid of `|θ|`, with
//! common random numbers across estimators, plus the exact James–Stein risk.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelConfig;
use crate::shrinkage::ShrinkageEstimator;
use crate::special::inverse_chisq_moment;
use crate::stream::NormalStream;

pub const DEFAULT_N_REPS: usize = 200_000;

/// Replicates per work unit. Part of the reduction order, so changing it
/// changes results in the last bits.
const CHUNK: u64 = 2_048;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskPoint {
    #[serde(rename = "estimator")]
    pub estimator_name: String,
    pub theta_norm: f64,
    pub risk_hat: f64,
    pub std_err: f64,
    pub n_reps: usize,
    pub seed: u64,
}

/// Running mean and co-moment matrix of per-replicate losses.
#[derive(Debug, Clone)]
struct LossMoments {
    n: u64,
    mean: Vec<f64>,
    comoment: Vec<f64>,
}

impl LossMoments {
    fn new(dim: usize) -> Self {
        Self {
            n: 0,
            mean: vec![0.0; dim],
            comoment: vec![0.0; dim * dim],
        }
    }

    fn dim(&self) -> usize {
        self.mean.len()
    }

    fn push(&mut self, losses: &[f64], delta: &mut [f64]) {
        let d = self.dim();
        self.n += 1;
        let n = self.n as f64;
        for i in 0..d {
            delta[i] = losses[i] - self.mean[i];
            self.mean[i] += delta[i] / n;
        }
        for i in 0..d {
            for j in 0..d {
                self.comoment[i * d + j] += delta[i] * (losses[j] - self.mean[j]);
            }
        }
    }

    fn merge(&mut self, other: &LossMoments) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = other.clone();
            return;
        }
        let d = self.dim();
        let (na, nb) = (self.n as f64, other.n as f64);
        let n = na + nb;
        let delta: Vec<f64> = (0..d).map(|i| other.mean[i] - self.mean[i]).collect();
        for i in 0..d {
            for j in 0..d {
                self.comoment[i * d + j] += other.comoment[i * d + j] + delta[i] * delta[j] * na * nb / n;
            }
        }
        for i in 0..d {
            self.mean[i] += delta[i] * nb / n;
        }
        self.n += other.n;
    }

    /// Sample covariance matrix, row-major.
    fn covariance(&self) -> Vec<f64> {
        let denom = (self.n - 1) as f64;
        self.comoment.iter().map(|c| c / denom).collect()
    }
}

fn squared_error(theta_norm: f64, y: &[f64], coef: f64) -> f64 {
    let first = theta_norm - coef * y[0];
    let rest: f64 = y[1..].iter().map(|x| coef * x).map(|d| d * d).sum();
    first * first + rest
}

/// Simulates `n_reps` replicates at `θ = (theta_norm, 0, ..., 0)`; every
/// estimator sees the same draws from `stream`.
fn simulate(
    estimators: &[&ShrinkageEstimator],
    theta_norm: f64,
    cfg: &ModelConfig,
    n_reps: usize,
    noise: &NormalStream,
    stream: u64,
) -> Result<LossMoments> {
    let k = cfg.k();
    let sd = cfg.v().sqrt();
    let n_reps = n_reps as u64;
    let n_chunks = n_reps.div_ceil(CHUNK);
    let chunks: Vec<LossMoments> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let start = chunk * CHUNK;
            let end = (start + CHUNK).min(n_reps);
            let mut draws = noise.at(stream, start);
            let mut y = vec![0.0; k];
            let mut losses = vec![0.0; estimators.len()];
            let mut scratch = vec![0.0; estimators.len()];
            let mut acc = LossMoments::new(estimators.len());
            for rep in start..end {
                draws.fill_next(&mut y);
                for yi in y.iter_mut() {
                    *yi *= sd;
                }
                y[0] += theta_norm;
                let y_norm_sq = crate::model::norm_sq(&y);
                for (loss, est) in losses.iter_mut().zip(estimators) {
                    let coef = est.coefficient(y_norm_sq, cfg).map_err(|e| Error::Replicate {
                        estimator: est.name().to_string(),
                        theta_norm,
                        replicate: rep,
                        source: Box::new(e),
                    })?;
                    *loss = squared_error(theta_norm, &y, coef);
                }
                acc.push(&losses, &mut scratch);
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut total = LossMoments::new(estimators.len());
    for c in &chunks {
        total.merge(c);
    }
    Ok(total)
}

fn check_run(theta_norm: f64, n_reps: usize) -> Result<()> {
    if !(theta_norm.is_finite() && theta_norm >= 0.0) {
        return Err(Error::domain("theta_norm", format!("must be finite and nonnegative, got {theta_norm}")));
    }
    if n_reps < 2 {
        return Err(Error::domain("n_reps", format!("need at least 2 replicates, got {n_reps}")));
    }
    Ok(())
}

fn point_from(moments: &LossMoments, idx: usize, est: &ShrinkageEstimator, theta_norm: f64, n_reps: usize, seed: u64) -> RiskPoint {
    let d = moments.dim();
    let var = moments.comoment[idx * d + idx] / (moments.n - 1) as f64;
    RiskPoint {
        estimator_name: est.name().to_string(),
        theta_norm,
        risk_hat: moments.mean[idx],
        std_err: (var.max(0.0) / moments.n as f64).sqrt(),
        n_reps,
        seed,
    }
}

/// Monte Carlo risk of one estimator at `|θ| = theta_norm`.
///
/// Uses stream 0, the same draws as the first grid point of a CRN curve.
pub fn mc_risk(est: &ShrinkageEstimator, theta_norm: f64, cfg: &ModelConfig, n_reps: usize, seed: u64) -> Result<RiskPoint> {
    check_run(theta_norm, n_reps)?;
    let noise = NormalStream::new(seed, cfg.k());
    let m = simulate(&[est], theta_norm, cfg, n_reps, &noise, 0)?;
    Ok(point_from(&m, 0, est, theta_norm, n_reps, seed))
}

/// `kV - V (k - 2)² E[1/χ²_k(|θ|²/V)]`.
pub fn exact_js_risk(theta_norm: f64, cfg: &ModelConfig) -> Result<f64> {
    cfg.require_k_at_least(3)?;
    if !(theta_norm.is_finite() && theta_norm >= 0.0) {
        return Err(Error::domain("theta_norm", format!("must be finite and nonnegative, got {theta_norm}")));
    }
    let k = cfg.k() as f64;
    let v = cfg.v();
    let lambda = theta_norm * theta_norm / v;
    Ok(k * v - v * (k - 2.0) * (k - 2.0) * inverse_chisq_moment(cfg.k(), lambda)?)
}

/// Risk table over estimators × theta grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskCurve {
    pub model: ModelConfig,
    pub theta_grid: Vec<f64>,
    pub estimator_names: Vec<String>,
    /// Theta-major: all estimators at `theta_grid[0]`, then `theta_grid[1]`, ...
    pub points: Vec<RiskPoint>,
    pub crn: bool,
    pub n_reps: usize,
    pub seed: u64,
    /// Per-theta loss covariance across estimators (row-major); CRN only.
    covariances: Option<Vec<Vec<f64>>>,
}

impl RiskCurve {
    pub fn n_estimators(&self) -> usize {
        self.estimator_names.len()
    }

    pub fn point(&self, theta_idx: usize, est_idx: usize) -> &RiskPoint {
        &self.points[theta_idx * self.n_estimators() + est_idx]
    }

    pub fn estimator_index(&self, name: &str) -> Option<usize> {
        self.estimator_names.iter().position(|n| n == name)
    }

    /// Points of one estimator, in grid order.
    pub fn series(&self, est_idx: usize) -> impl Iterator<Item = &RiskPoint> + '_ {
        (0..self.theta_grid.len()).map(move |t| self.point(t, est_idx))
    }

    /// `risk_hat(a) - risk_hat(b)` and its standard error at one theta.
    ///
    /// Under CRN the error uses the paired covariance; otherwise the two
    /// cells are independent and their variances add.
    pub fn paired_difference(&self, theta_idx: usize, a: usize, b: usize) -> (f64, f64) {
        let (pa, pb) = (self.point(theta_idx, a), self.point(theta_idx, b));
        let diff = pa.risk_hat - pb.risk_hat;
        let se = match &self.covariances {
            Some(covs) => {
                let d = self.n_estimators();
                let c = &covs[theta_idx];
                let var = c[a * d + a] + c[b * d + b] - 2.0 * c[a * d + b];
                (var.max(0.0) / self.n_reps as f64).sqrt()
            }
            None => (pa.std_err * pa.std_err + pb.std_err * pb.std_err).sqrt(),
        };
        (diff, se)
    }
}

/// Fills every (estimator, theta) cell.
///
/// With `crn`, all estimators at a theta read the same stream (keyed by the
/// theta index); without it, each cell gets its own stream.
pub fn risk_curve(
    estimators: &[ShrinkageEstimator],
    theta_grid: &[f64],
    cfg: &ModelConfig,
    n_reps: usize,
    seed: u64,
    crn: bool,
) -> Result<RiskCurve> {
    if estimators.is_empty() {
        return Err(Error::domain("estimators", "need at least one estimator"));
    }
    if theta_grid.is_empty() {
        return Err(Error::domain("theta_grid", "need at least one theta"));
    }
    for &t in theta_grid {
        check_run(t, n_reps)?;
    }
    if theta_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("theta_grid", "must be strictly ascending"));
    }
    let noise = NormalStream::new(seed, cfg.k());
    let refs: Vec<&ShrinkageEstimator> = estimators.iter().collect();

    let per_theta: Vec<(Vec<RiskPoint>, Option<Vec<f64>>)> = theta_grid
        .par_iter()
        .enumerate()
        .map(|(ti, &theta)| {
            if crn {
                let m = simulate(&refs, theta, cfg, n_reps, &noise, ti as u64)?;
                let points = refs
                    .iter()
                    .enumerate()
                    .map(|(ei, est)| point_from(&m, ei, est, theta, n_reps, seed))
                    .collect();
                Ok((points, Some(m.covariance())))
            } else {
                let points = refs
                    .iter()
                    .enumerate()
                    .map(|(ei, est)| {
                        let stream = ((ei as u64 + 1) << 32) | ti as u64;
                        let m = simulate(&[*est], theta, cfg, n_reps, &noise, stream)?;
                        Ok(point_from(&m, 0, est, theta, n_reps, seed))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok((points, None))
            }
        })
        .collect::<Result<_>>()?;

    let mut points = Vec::with_capacity(theta_grid.len() * estimators.len());
    let mut covariances = crn.then(Vec::new);
    for (p, cov) in per_theta {
        points.extend(p);
        if let (Some(all), Some(c)) = (covariances.as_mut(), cov) {
            all.push(c);
        }
    }
    Ok(RiskCurve {
        model: *cfg,
        theta_grid: theta_grid.to_vec(),
        estimator_names: estimators.iter().map(|e| e.name().to_string()).collect(),
        points,
        crn,
        n_reps,
        seed,
        covariances,
    })
}
