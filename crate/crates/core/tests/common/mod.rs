//! Test-only numerical oracles, independent of the library's quadrature
//! and special-function code.

#![allow(dead_code)]

/// Adaptive Simpson with Richardson correction.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, 60)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// `ln Γ(n)` for a positive integer or half-integer argument, by recurrence.
pub fn ln_gamma_half_integer(x: f64) -> f64 {
    let twice = (2.0 * x).round() as i64;
    assert!(twice > 0 && (2.0 * x - twice as f64).abs() < 1e-12);
    let (mut acc, mut z) = if twice % 2 == 0 { (0.0, 1.0) } else { (0.5 * std::f64::consts::PI.ln(), 0.5) };
    while z < x - 0.25 {
        acc += z.ln();
        z += 1.0;
    }
    acc
}

/// Chi-squared density with `k` degrees of freedom.
pub fn chisq_density(k: usize, x: f64) -> f64 {
    if x <= 0.0 {
        return if k == 2 { 0.5 } else { 0.0 };
    }
    let h = 0.5 * k as f64;
    ((h - 1.0) * x.ln() - 0.5 * x - h * std::f64::consts::LN_2 - ln_gamma_half_integer(h)).exp()
}

/// The two posterior pieces from direct integration over
/// `t = 1/(V + A)`, normalized by `V Γ(k/2) 2^{k/2} / s^{k/2}`.
pub fn posterior_pieces_oracle(s: f64, v: f64, k: usize) -> (f64, f64) {
    let h = 0.5 * k as f64;
    let log_cf = v.ln() + ln_gamma_half_integer(h) + h * std::f64::consts::LN_2 - h * s.ln();
    let f = |t: f64| if t <= 0.0 { 0.0 } else { (v.ln() + (h - 1.0) * t.ln() - 0.5 * t * s - log_cf).exp() };
    let split = 1.0 / v;
    let lower = simpson(&f, 0.0, split, 1e-14);
    // upper tail: integrate in slabs until contributions vanish
    let mut upper = 0.0;
    let mut a = split;
    let width = 4.0 / s;
    loop {
        let piece = simpson(&f, a, a + width, 1e-15);
        upper += piece;
        a += width;
        if piece < 1e-18 && a > (k as f64) / s * 4.0 {
            break;
        }
    }
    (upper, lower)
}
