//! Adaptive Gauss-Legendre quadrature.
//!
//! Each panel is integrated with a fixed-order rule and with the same rule on
//! its two halves; the difference is the panel error estimate. The panel with
//! the largest estimate is bisected until the total meets the tolerance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const ORDER: usize = 10;
const MAX_PANELS: usize = 20_000;
const MAX_DEPTH: u32 = 60;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    /// Sum of accepted panel error estimates.
    pub error: f64,
    pub panels: usize,
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`,
/// by Newton iteration on the Legendre recurrence.
pub fn gauss_legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            // p1 = P_n(x), p0 = P_{n-1}(x)
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

struct Rule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Rule {
    fn apply(&self, f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        half * self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
    }
}

/// Integrates `f` over `[a, b]` (either orientation) to absolute tolerance `tol`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<Quadrature> {
    if !(tol > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::invalid(format!(
            "bad quadrature request: [{a}, {b}] tol {tol}"
        )));
    }
    if a == b {
        return Ok(Quadrature {
            value: 0.0,
            error: 0.0,
            panels: 0,
        });
    }
    let (nodes, weights) = gauss_legendre_rule(ORDER);
    let rule = Rule { nodes, weights };
    let total = (b - a).abs();

    // Global adaptivity: keep bisecting the panel with the largest error
    // estimate until the summed estimate meets `tol`.
    let mut heap = BinaryHeap::new();
    let mut error = 0.0;
    let first = Panel::new(&rule, &f, a, b, rule.apply(&f, a, b), 0)?;
    error += first.error;
    heap.push(first);
    while error > tol {
        let worst = heap.pop().expect("at least one panel");
        if worst.depth >= MAX_DEPTH || heap.len() + 2 > MAX_PANELS || (worst.hi - worst.lo).abs() < 1e-15 * total {
            return Err(Error::QuadratureFailure(format!(
                "subdivision cap reached near [{}, {}] (error {error:e}, tol {tol:e})",
                worst.lo, worst.hi
            )));
        }
        let mid = 0.5 * (worst.lo + worst.hi);
        let left = Panel::new(&rule, &f, worst.lo, mid, worst.left, worst.depth + 1)?;
        let right = Panel::new(&rule, &f, mid, worst.hi, worst.right, worst.depth + 1)?;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        if heap.len() % 64 == 0 {
            // wipe accumulated cancellation
            error = heap.iter().map(|p| p.error).sum();
        }
    }
    let panels = heap.len();
    let value = heap.iter().map(|p| p.value).sum();
    error = heap.iter().map(|p| p.error).sum();
    Ok(Quadrature {
        value,
        error,
        panels,
    })
}

struct Panel {
    lo: f64,
    hi: f64,
    left: f64,
    right: f64,
    value: f64,
    error: f64,
    depth: u32,
}

impl Panel {
    fn new(
        rule: &Rule,
        f: &impl Fn(f64) -> f64,
        lo: f64,
        hi: f64,
        whole: f64,
        depth: u32,
    ) -> Result<Self> {
        let mid = 0.5 * (lo + hi);
        let left = rule.apply(f, lo, mid);
        let right = rule.apply(f, mid, hi);
        let value = left + right;
        if !value.is_finite() || !whole.is_finite() {
            return Err(Error::QuadratureFailure(format!(
                "non-finite integrand on [{lo}, {hi}]"
            )));
        }
        Ok(Panel {
            lo,
            hi,
            left,
            right,
            value,
            error: (value - whole).abs(),
            depth,
        })
    }
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
            .then_with(|| other.lo.total_cmp(&self.lo))
    }
}
