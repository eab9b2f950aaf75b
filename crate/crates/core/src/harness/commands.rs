//! Subcommand implementations. Each writes its report to `out` and returns
//! the process exit code; errors map to codes via [`HarnessError::exit_code`].

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use super::config::ExperimentConfig;
use super::table::write_risk_csv;
use super::{exit, HarnessError};
use crate::bayes::{
    improper_prior_probe, positive_branch_integral, posterior_pieces_by_quadrature, posterior_shrink_decomposition,
    PosteriorDecomposition,
};
use crate::error::Error;
use crate::figure1::{Figure1, LEFT_DIVISORS};
use crate::minimax::{certify, BaranchikReport, LogGrid};
use crate::model::{ModelConfig, ObservationStats};
use crate::shrinkage::{AdmParams, ShrinkageEstimator};

/// Relative agreement required between the normalized posterior factor and `V(k-2)/|y|²`.
pub const IDENTITY_REL_TOL: f64 = 1e-10;

#[derive(Debug, Parser)]
#[command(name = "normal-shrink", version, about = "Shrinkage estimators for the normal means model")]
pub struct Cli {
    /// Size of the worker pool for Monte Carlo runs (defaults to all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// TOML experiment config.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub n_reps: Option<usize>,
    /// Output file or directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Shrink factor, coefficient and g for each estimator at one observation.
    Shrink {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        y_norm_sq: Option<f64>,
    },
    /// Monte Carlo risk panels, written as left_panel.csv and right_panel.csv.
    Figure1 {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Baranchik minimaxity certification for each estimator.
    CheckMinimax {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Two-piece chi-squared decomposition of the posterior shrink factor.
    PosteriorIdentity {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        y_norm_sq: Option<f64>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        v: Option<f64>,
    },
    /// Partial prior mass over A in (-V, -eps) as eps shrinks.
    Divergence {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        theta_norm_sq: Option<f64>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        v: Option<f64>,
        /// Comma-separated, strictly decreasing.
        #[arg(long, value_delimiter = ',')]
        eps: Option<Vec<f64>>,
    },
}

fn load(common: &CommonArgs) -> Result<ExperimentConfig, HarnessError> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.run.seed = seed;
    }
    if let Some(n) = common.n_reps {
        cfg.run.n_reps = n;
    }
    if let Some(out) = &common.out {
        cfg.run.output = Some(out.clone());
    }
    Ok(cfg)
}

fn model_with_overrides(cfg: &mut ExperimentConfig, k: Option<usize>, v: Option<f64>) -> Result<ModelConfig, HarnessError> {
    if let Some(k) = k {
        cfg.model.k = k;
    }
    if let Some(v) = v {
        cfg.model.v = v;
    }
    Ok(cfg.model_config()?)
}

pub fn run<W: Write>(cli: Cli, out: &mut W) -> Result<i32, HarnessError> {
    match cli.command {
        Command::Shrink { common, y_norm_sq } => cmd_shrink(&common, y_norm_sq, out),
        Command::Figure1 { common } => cmd_figure1(&common, out),
        Command::CheckMinimax { common } => cmd_check_minimax(&common, out),
        Command::PosteriorIdentity { common, y_norm_sq, k, v } => cmd_posterior_identity(&common, y_norm_sq, k, v, out),
        Command::Divergence {
            common,
            theta_norm_sq,
            k,
            v,
            eps,
        } => cmd_divergence(&common, theta_norm_sq, k, v, eps, out),
    }
}

fn estimators_or(
    cfg: &ExperimentConfig,
    model: &ModelConfig,
    default: impl FnOnce() -> crate::Result<Vec<ShrinkageEstimator>>,
) -> Result<Vec<ShrinkageEstimator>, HarnessError> {
    if cfg.estimators.is_empty() {
        Ok(default()?)
    } else {
        cfg.build_estimators(model)
    }
}

pub fn cmd_shrink<W: Write>(common: &CommonArgs, y_norm_sq: Option<f64>, out: &mut W) -> Result<i32, HarnessError> {
    let cfg = load(common)?;
    let model = cfg.model_config()?;
    let y_norm_sq = match (y_norm_sq, cfg.shrink.y_norm_sq, &cfg.shrink.y) {
        (Some(s), _, _) | (None, Some(s), None) => s,
        (None, None, Some(y)) => ObservationStats::new(y.clone(), &model)?.y_norm_sq,
        (None, Some(_), Some(_)) => {
            return Err(HarnessError::Config("set only one of shrink.y_norm_sq and shrink.y".into()))
        }
        (None, None, None) => {
            return Err(HarnessError::Config("no observation: pass --y-norm-sq or set [shrink]".into()))
        }
    };
    if !(y_norm_sq.is_finite() && y_norm_sq >= 0.0) {
        return Err(Error::domain("y_norm_sq", format!("must be finite and nonnegative, got {y_norm_sq}")).into());
    }
    let ests = estimators_or(&cfg, &model, || {
        Ok(vec![
            ShrinkageEstimator::james_stein(),
            ShrinkageEstimator::positive_part(),
            ShrinkageEstimator::adm(AdmParams::default_for(&model)?),
            ShrinkageEstimator::mle(),
        ])
    })?;
    writeln!(
        out,
        "k = {}, V = {}, |y|^2 = {y_norm_sq}, T = {}",
        model.k(),
        model.v(),
        y_norm_sq / (2.0 * model.v())
    )?;
    writeln!(out, "{:<24} {:>22} {:>22} {:>22}  flag", "estimator", "B", "1-B", "g")?;
    for est in &ests {
        let b = est.shrink_factor(y_norm_sq, &model)?;
        let g = if y_norm_sq > 0.0 {
            format!("{}", est.g_of_theorem(y_norm_sq, &model)?)
        } else {
            "undefined".to_string()
        };
        let flag = if 1.0 - b < 0.0 { "sign-reversal" } else { "" };
        writeln!(out, "{:<24} {:>22} {:>22} {:>22}  {flag}", est.name(), b, 1.0 - b, g)?;
    }
    Ok(exit::SUCCESS)
}

fn write_csv_file(path: &std::path::Path, curve: &crate::risk::RiskCurve, comments: &[String]) -> Result<(), HarnessError> {
    let file = BufWriter::new(File::create(path)?);
    write_risk_csv(file, curve, comments).map_err(|e| HarnessError::Io(std::io::Error::other(e.to_string())))
}

pub fn cmd_figure1<W: Write>(common: &CommonArgs, out: &mut W) -> Result<i32, HarnessError> {
    let cfg = load(common)?;
    let model = cfg.model_config()?;
    let grid = cfg.run.theta_values()?;
    let dir = cfg.run.output.clone().unwrap_or_else(|| PathBuf::from("figure1_out"));
    std::fs::create_dir_all(&dir)?;

    let fig = Figure1::run(&model, &grid, cfg.run.n_reps, cfg.run.seed, cfg.run.crn)?;
    let divisors: Vec<String> = LEFT_DIVISORS.iter().map(|d| d.to_string()).collect();
    let shared = format!(
        "k={} V={} n_reps={} seed={} crn={}; theta_norm is |theta| with theta placed on the first axis",
        model.k(),
        model.v(),
        cfg.run.n_reps,
        cfg.run.seed,
        cfg.run.crn
    );
    write_csv_file(
        &dir.join("left_panel.csv"),
        &fig.left,
        &[
            format!("left panel: James-Stein and ADM with c=1, m=(k-2)/d for d in {}", divisors.join(",")),
            shared.clone(),
        ],
    )?;
    write_csv_file(
        &dir.join("right_panel.csv"),
        &fig.right,
        &[
            "right panel: ADM with m=(k-2)/2 and c=1, James-Stein, positive-part James-Stein".to_string(),
            "the admissible-estimator curve is omitted: its shrink factor is not implemented here; supply it as a custom estimator".to_string(),
            shared,
        ],
    )?;

    let checks = fig.check()?;
    writeln!(out, "wrote {} and {}", dir.join("left_panel.csv").display(), dir.join("right_panel.csv").display())?;
    writeln!(out, "max |risk(ADM m*) - risk(JS)| = {:.6}", checks.max_adm_js_gap)?;
    let c = &checks.crossing;
    writeln!(out, "positive-part better than ADM at theta_norm = {:?}", c.first_better)?;
    writeln!(out, "ADM better than positive-part at theta_norm = {:?}", c.second_better)?;
    match (c.below, c.above) {
        (Some(lo), Some(hi)) => writeln!(out, "crossing between theta_norm = {lo} and {hi}")?,
        _ => writeln!(out, "no crossing detected")?,
    }
    for v in &checks.oracle_deviations {
        writeln!(out, "note: JS cell beyond 3 se of exact risk at theta_norm = {}: {}", v.theta_norm, v.detail)?;
    }
    for v in &checks.violations {
        writeln!(out, "VIOLATION [{}] theta_norm = {}: {}", v.check, v.theta_norm, v.detail)?;
    }
    if checks.passed() {
        writeln!(out, "all invariants hold")?;
        Ok(exit::SUCCESS)
    } else {
        writeln!(out, "invariant check failed")?;
        Ok(exit::INVARIANT)
    }
}

pub fn cmd_check_minimax<W: Write>(common: &CommonArgs, out: &mut W) -> Result<i32, HarnessError> {
    let cfg = load(common)?;
    let model = cfg.model_config()?;
    let grid = LogGrid::new(cfg.minimax.grid_min, cfg.minimax.grid_max, cfg.minimax.grid_points)?;
    let ests = estimators_or(&cfg, &model, || {
        Ok(vec![
            ShrinkageEstimator::james_stein(),
            ShrinkageEstimator::adm(AdmParams::default_for(&model)?),
        ])
    })?;
    let reports = ests
        .iter()
        .map(|e| certify(e, &model, &grid))
        .collect::<crate::Result<Vec<_>>>()?;
    for r in &reports {
        writeln!(out, "{r}")?;
    }
    if let Some(path) = &cfg.run.output {
        let mut f = BufWriter::new(File::create(path)?);
        writeln!(f, "{}", BaranchikReport::CSV_HEADER)?;
        for r in &reports {
            writeln!(f, "{}", r.csv_row())?;
        }
        f.flush()?;
    }
    Ok(if reports.iter().all(|r| r.certified) {
        exit::SUCCESS
    } else {
        exit::INVARIANT
    })
}

fn require_even_k(model: &ModelConfig) -> Result<(), HarnessError> {
    if !model.k().is_multiple_of(2) || model.k() < 4 {
        return Err(Error::domain(
            "k",
            format!(
                "needs even k >= 4 (the prior integral over negative A is only real-valued for even k), got k = {}",
                model.k()
            ),
        )
        .into());
    }
    Ok(())
}

pub fn cmd_posterior_identity<W: Write>(
    common: &CommonArgs,
    y_norm_sq: Option<f64>,
    k: Option<usize>,
    v: Option<f64>,
    out: &mut W,
) -> Result<i32, HarnessError> {
    let mut cfg = load(common)?;
    let model = model_with_overrides(&mut cfg, k, v)?;
    require_even_k(&model)?;
    let s = y_norm_sq
        .or(cfg.posterior.y_norm_sq)
        .ok_or_else(|| HarnessError::Config("no |y|^2: pass --y-norm-sq or set [posterior]".into()))?;
    let d = posterior_shrink_decomposition(s, &model)?;
    let (q_upper, q_lower) = posterior_pieces_by_quadrature(s, &model)?;
    let closed = PosteriorDecomposition::closed_form(s, &model);
    let rel = ((d.normalized_eb - closed) / closed).abs();
    writeln!(out, "k = {}, V = {}, |y|^2 = {s}", model.k(), model.v())?;
    writeln!(out, "upper_piece  P(chi2_k >= |y|^2/V) = {}", d.upper_piece)?;
    writeln!(out, "lower_piece  P(chi2_k <= |y|^2/V) = {}", d.lower_piece)?;
    writeln!(out, "sum of pieces                     = {}", d.upper_piece + d.lower_piece)?;
    writeln!(out, "quadrature upper / lower          = {q_upper} / {q_lower}")?;
    writeln!(
        out,
        "quadrature deviation              = {:e}",
        (q_upper - d.upper_piece).abs().max((q_lower - d.lower_piece).abs())
    )?;
    writeln!(out, "ln common_factor                  = {}", d.log_common_factor)?;
    writeln!(out, "ln normalizer                     = {}", d.log_normalizer)?;
    writeln!(out, "normalized E(B|y)                 = {}", d.normalized_eb)?;
    writeln!(out, "V(k-2)/|y|^2                      = {closed}")?;
    writeln!(out, "relative difference               = {rel:e}")?;
    Ok(if rel <= IDENTITY_REL_TOL {
        exit::SUCCESS
    } else {
        exit::INVARIANT
    })
}

pub fn cmd_divergence<W: Write>(
    common: &CommonArgs,
    theta_norm_sq: Option<f64>,
    k: Option<usize>,
    v: Option<f64>,
    eps: Option<Vec<f64>>,
    out: &mut W,
) -> Result<i32, HarnessError> {
    let mut cfg = load(common)?;
    let model = model_with_overrides(&mut cfg, k, v)?;
    require_even_k(&model)?;
    let s = theta_norm_sq.unwrap_or(cfg.divergence.theta_norm_sq);
    let eps = eps.unwrap_or_else(|| cfg.divergence.eps.clone());
    if eps.is_empty() || eps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::domain("eps", "list must be nonempty and strictly decreasing").into());
    }
    let probes = eps
        .iter()
        .map(|&e| improper_prior_probe(s, &model, e))
        .collect::<crate::Result<Vec<_>>>()?;
    writeln!(out, "k = {}, V = {}, |theta|^2 = {s}, sign on A < 0 = {:+}", model.k(), model.v(), probes[0].sign)?;
    writeln!(out, "{:>12} {:>26} {:>22} {:>14}", "eps", "ln partial_magnitude", "log10 growth", "magnitude")?;
    let mut increasing = true;
    for (i, p) in probes.iter().enumerate() {
        let growth = if i == 0 {
            String::new()
        } else {
            let g = p.log_magnitude - probes[i - 1].log_magnitude;
            increasing &= g > 0.0;
            format!("{}", g / std::f64::consts::LN_10)
        };
        writeln!(out, "{:>12e} {:>26} {:>22} {:>14e}", p.eps, p.log_magnitude, growth, p.magnitude())?;
    }
    writeln!(out, "positive branch A in (0, cut):")?;
    let mut prev: Option<f64> = None;
    for &cut in &cfg.divergence.contrast_cuts {
        let val = positive_branch_integral(s, &model, cut)?;
        let change = prev.map(|p| format!("{:e}", (val - p).abs())).unwrap_or_default();
        writeln!(out, "{:>12e} {:>26} {:>22}", cut, val, change)?;
        prev = Some(val);
    }
    if increasing {
        writeln!(out, "partial magnitude strictly increasing as eps decreases")?;
        Ok(exit::SUCCESS)
    } else {
        writeln!(out, "partial magnitude NOT strictly increasing")?;
        Ok(exit::INVARIANT)
    }
}
