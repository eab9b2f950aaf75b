//! Globally adaptive Gauss–Legendre quadrature.
//!
//! Each panel is integrated with an `n`-point and a `2n`-point rule; their
//! difference is the panel error estimate. The panel with the largest error
//! is bisected until the summed estimate meets the tolerance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Roots of `P_n` by Newton iteration from the Chebyshev-like initial guess.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let sum: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum();
        half * sum
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub panels: usize,
}

#[derive(Debug, Clone)]
pub struct AdaptiveQuadrature {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
    coarse: GaussLegendre,
    fine: GaussLegendre,
}

impl Default for AdaptiveQuadrature {
    fn default() -> Self {
        Self::new(1e-9, 0.0, 1_000_000, 10)
    }
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

impl AdaptiveQuadrature {
    /// `order` is the node count of the coarse rule; the fine rule doubles it.
    pub fn new(rel_tol: f64, abs_tol: f64, max_panels: usize, order: usize) -> Self {
        Self {
            rel_tol,
            abs_tol,
            max_panels,
            coarse: GaussLegendre::new(order),
            fine: GaussLegendre::new(2 * order),
        }
    }

    fn panel<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64) -> Panel {
        let value = self.fine.integrate(f, a, b);
        let error = (value - self.coarse.integrate(f, a, b)).abs();
        Panel { a, b, value, error }
    }

    /// Integrates `f` over `[a, b]`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<QuadratureResult> {
        self.integrate_with_breaks(f, &[a, b])
    }

    /// Integrates over consecutive intervals between `breaks`, starting from
    /// one panel per interval.
    pub fn integrate_with_breaks<F: Fn(f64) -> f64>(&self, f: F, breaks: &[f64]) -> Result<QuadratureResult> {
        if breaks.len() < 2 {
            return Err(Error::domain("breaks", "need at least two points"));
        }
        if breaks.iter().any(|x| !x.is_finite()) || breaks.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain("breaks", "must be finite and strictly increasing"));
        }
        let mut heap: BinaryHeap<Panel> = breaks.windows(2).map(|w| self.panel(&f, w[0], w[1])).collect();
        loop {
            let value: f64 = heap.iter().map(|p| p.value).sum();
            let error: f64 = heap.iter().map(|p| p.error).sum();
            if !value.is_finite() {
                return Err(Error::domain("integrand", "produced a non-finite value"));
            }
            if error <= self.abs_tol.max(self.rel_tol * value.abs()) {
                return Ok(QuadratureResult {
                    value,
                    error_estimate: error,
                    panels: heap.len(),
                });
            }
            if heap.len() >= self.max_panels {
                return Err(Error::Convergence {
                    method: "adaptive Gauss-Legendre",
                    iterations: heap.len(),
                });
            }
            // Rebisect the worst panels in a batch to keep the sums above cheap.
            let batch = (heap.len() / 8).max(1);
            for _ in 0..batch {
                let worst = heap.pop().expect("heap is nonempty");
                let mid = 0.5 * (worst.a + worst.b);
                if mid <= worst.a || mid >= worst.b {
                    return Err(Error::Convergence {
                        method: "adaptive Gauss-Legendre (panel below resolution)",
                        iterations: heap.len(),
                    });
                }
                heap.push(self.panel(&f, worst.a, mid));
                heap.push(self.panel(&f, mid, worst.b));
            }
        }
    }
}
