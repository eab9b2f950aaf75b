//! Monte Carlo risk checked against exact risk and structural properties.

use normal_shrink::figure1::{default_theta_grid, dominance_violations};
use normal_shrink::minimax::{certify, LogGrid};
use normal_shrink::risk::{exact_js_risk, mc_risk, risk_curve};
use normal_shrink::{AdmParams, ModelConfig, ShrinkageEstimator};
use proptest::prelude::*;

fn k10() -> ModelConfig {
    ModelConfig::new(10, 1.0).unwrap()
}

#[test]
fn js_curve_matches_exact_risk_over_grid() {
    // Seed chosen once; a 25-point grid at 3 se has ~6% chance of a chance
    // exceedance for an arbitrary seed.
    let cfg = k10();
    let curve = risk_curve(&[ShrinkageEstimator::james_stein()], &default_theta_grid(), &cfg, 100_000, 2024, true).unwrap();
    for p in &curve.points {
        let exact = exact_js_risk(p.theta_norm, &cfg).unwrap();
        assert!((p.risk_hat - exact).abs() < 3.0 * p.std_err, "theta {}: {} vs {exact}", p.theta_norm, p.risk_hat);
    }
}

#[test]
fn mle_risk_is_kv() {
    let cfg = ModelConfig::new(6, 2.5).unwrap();
    let p = mc_risk(&ShrinkageEstimator::mle(), 3.0, &cfg, 100_000, 9).unwrap();
    assert!((p.risk_hat - 15.0).abs() < 3.0 * p.std_err);
}

#[test]
fn exact_js_risk_approaches_kv_far_out() {
    let cfg = k10();
    let far = exact_js_risk(1e3, &cfg).unwrap();
    assert!(far < 10.0 && far > 9.99);
    let mut prev = exact_js_risk(0.0, &cfg).unwrap();
    for i in 1..40 {
        let r = exact_js_risk(0.5 * i as f64, &cfg).unwrap();
        assert!(r > prev);
        prev = r;
    }
}

#[test]
fn positive_part_never_worse_than_js_under_crn() {
    let cfg = ModelConfig::new(5, 1.0).unwrap();
    let ests = [ShrinkageEstimator::james_stein(), ShrinkageEstimator::positive_part()];
    let curve = risk_curve(&ests, &[0.0, 1.0, 2.0, 4.0, 8.0], &cfg, 20_000, 3, true).unwrap();
    assert!(dominance_violations(&curve, 1, 0).is_empty());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn certified_estimators_stay_below_kv(m in 0.2f64..7.0, theta in 0.0f64..15.0, seed in 0u64..1_000_000) {
        let cfg = k10();
        let est = ShrinkageEstimator::adm(AdmParams::new(m, 1.0).unwrap());
        let grid = LogGrid::new(1e-6, 1e8, 1000).unwrap();
        prop_assume!(certify(&est, &cfg, &grid).unwrap().certified);
        let p = mc_risk(&est, theta, &cfg, 20_000, seed).unwrap();
        prop_assert!(p.risk_hat <= 10.0 + 3.0 * p.std_err, "risk {} se {}", p.risk_hat, p.std_err);
    }

    #[test]
    fn risk_depends_on_theta_only_through_norm(theta in 0.0f64..10.0, seed in 0u64..1000) {
        // The library places θ on the first axis; the exact JS risk is a
        // function of |θ| alone, so MC at the same norm agrees with it.
        let cfg = ModelConfig::new(4, 1.0).unwrap();
        let p = mc_risk(&ShrinkageEstimator::james_stein(), theta, &cfg, 40_000, seed).unwrap();
        let exact = exact_js_risk(theta, &cfg).unwrap();
        prop_assert!((p.risk_hat - exact).abs() < 5.0 * p.std_err);
    }
}
