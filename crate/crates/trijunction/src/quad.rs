//! Gauss–Legendre rules, barycentric Lagrange interpolation and a
//! vector-valued adaptive integrator used for near-field interactions.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_traits::Float;

/// Gauss–Legendre nodes and weights on [-1, 1], nodes ascending.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Barycentric interpolation weights for `nodes`.
    pub bary: Vec<f64>,
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre order must be positive");
        if n == 1 {
            return Self { nodes: vec![0.0], weights: vec![2.0], bary: vec![1.0] };
        }
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = -(PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre_and_derivative(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre_and_derivative(n, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = x;
            nodes[n - 1 - i] = -x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        let bary = nodes
            .iter()
            .zip(&weights)
            .enumerate()
            .map(|(j, (x, w))| {
                let s = ((1.0 - x * x) * w).sqrt();
                if j % 2 == 0 {
                    s
                } else {
                    -s
                }
            })
            .collect();
        Self { nodes, weights, bary }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
        let h = 0.5 * (b - a);
        let c = 0.5 * (a + b);
        let x = self.nodes.iter().map(|t| c + h * t).collect();
        let w = self.weights.iter().map(|w| h * w).collect();
        (x, w)
    }

    /// Values of the Lagrange basis on `nodes` at reference point `x`.
    pub fn lagrange(&self, x: f64, out: &mut [f64]) {
        lagrange_bary(&self.nodes, &self.bary, x, out);
    }
}

/// Barycentric Lagrange basis values at `x`.
pub fn lagrange_bary(nodes: &[f64], bary: &[f64], x: f64, out: &mut [f64]) {
    let mut denom = 0.0;
    for (j, (&xj, &bj)) in nodes.iter().zip(bary).enumerate() {
        let d = x - xj;
        if d == 0.0 {
            out.iter_mut().for_each(|o| *o = 0.0);
            out[j] = 1.0;
            return;
        }
        out[j] = bj / d;
        denom += out[j];
    }
    out.iter_mut().for_each(|o| *o /= denom);
}

/// Failure of [`adaptive_vec`] to meet its tolerance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NotConverged {
    pub a: f64,
    pub b: f64,
}

/// Adaptive integration of a vector-valued integrand over [a, b].
///
/// Each interval is accepted when its Gauss–Legendre estimate agrees with the
/// sum over its two halves to `tol` in max-norm, scaled by the interval's
/// share of [a, b].
pub fn adaptive_vec<F>(
    rule: &GaussLegendre,
    f: &mut F,
    a: f64,
    b: f64,
    dim: usize,
    tol: f64,
    max_depth: usize,
) -> Result<Vec<f64>, NotConverged>
where
    F: FnMut(f64, &mut [f64]),
{
    let mut total = vec![0.0; dim];
    let mut buf = vec![0.0; dim];
    let whole = estimate(rule, f, a, b, &mut buf);
    let mut stack = vec![(a, b, whole, 0usize)];
    let len = b - a;
    while let Some((lo, hi, coarse, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = estimate(rule, f, lo, mid, &mut buf);
        let right = estimate(rule, f, mid, hi, &mut buf);
        let mut err = 0.0f64;
        for k in 0..dim {
            err = err.max((left[k] + right[k] - coarse[k]).abs());
        }
        if err <= tol * ((hi - lo) / len).max(1e-3) {
            for k in 0..dim {
                total[k] += left[k] + right[k];
            }
        } else if depth >= max_depth {
            return Err(NotConverged { a: lo, b: hi });
        } else {
            stack.push((lo, mid, left, depth + 1));
            stack.push((mid, hi, right, depth + 1));
        }
    }
    Ok(total)
}

fn estimate<F>(rule: &GaussLegendre, f: &mut F, a: f64, b: f64, buf: &mut [f64]) -> Vec<f64>
where
    F: FnMut(f64, &mut [f64]),
{
    let h = 0.5 * (b - a);
    let c = 0.5 * (a + b);
    let mut acc = vec![0.0; buf.len()];
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        f(c + h * x, buf);
        for (s, v) in acc.iter_mut().zip(buf.iter()) {
            *s += h * w * v;
        }
    }
    acc
}
