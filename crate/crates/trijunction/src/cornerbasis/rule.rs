//! Quadrature and interpolation rule for the singular family
//! F = {t^β : β ∈ {0} ∪ [1/2, β_max]} on [0, 1].
//!
//! The family is sampled on a dyadically graded Gauss–Legendre grid and
//! compressed to an orthonormal basis φ. Nodes and positive weights come from
//! a nonnegative least-squares fit of the basis moments; the interpolation
//! matrix V inverts the √w-scaled basis-at-nodes matrix.

use alloc::format;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
use num_traits::Float;

use super::nnls::nnls;
use crate::error::{Error, ErrorKind, Result};
use crate::quad::{lagrange_bary, GaussLegendre};

pub const GRID_PANELS: usize = 40;
pub const GRID_ORDER: usize = 30;
pub const MAX_NODES: usize = 50;
pub const MAX_COND: f64 = 100.0;
pub const EXACTNESS_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct CornerRule {
    pub beta_max: f64,
    /// Requested compression tolerance.
    pub tol: f64,
    /// Rank actually used (at least the rank at `tol`).
    pub rank: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// basis[(j, i)] = φ_i(t_j)·√w_j.
    pub basis: DMatrix<f64>,
    /// V = basis⁻¹: scaled samples f(t_j)√w_j to φ coefficients.
    pub interp: DMatrix<f64>,
    pub cond_v: f64,
    /// Reference grid: panel breakpoints, nodes, weights and φ values.
    pub grid_breaks: Vec<f64>,
    pub grid_nodes: Vec<f64>,
    pub grid_weights: Vec<f64>,
    pub grid_basis: DMatrix<f64>,
    /// Gauss–Legendre rule used on each grid panel.
    pub panel_rule: GaussLegendre,
    pub max_quad_error: f64,
    pub max_interp_error: f64,
}

/// Graded reference grid: [0, 2^-(P-1)] then [2^-(k+1), 2^-k].
pub fn reference_grid() -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let gl = GaussLegendre::new(GRID_ORDER);
    let mut breaks = Vec::with_capacity(GRID_PANELS + 1);
    breaks.push(0.0);
    for k in (0..GRID_PANELS).rev() {
        breaks.push(0.5f64.powi(k as i32));
    }
    let mut t = Vec::with_capacity(GRID_PANELS * GRID_ORDER);
    let mut w = Vec::with_capacity(GRID_PANELS * GRID_ORDER);
    for p in breaks.windows(2) {
        let (x, y) = gl.mapped(p[0], p[1]);
        t.extend(x);
        w.extend(y);
    }
    (breaks, t, w)
}

/// Sampled exponents: 0, then [1/2, 1) by 0.01, [1, 10) by 0.05, [10, β_max] by 0.1.
pub fn beta_samples(beta_max: f64) -> Vec<f64> {
    let mut out = alloc::vec![0.0];
    let mut push_range = |lo: f64, hi: f64, step: f64, inclusive: bool| {
        let n = ((hi - lo) / step).round() as usize;
        let n = if inclusive { n + 1 } else { n };
        for k in 0..n {
            let b = lo + step * k as f64;
            if b <= beta_max + 1e-9 {
                out.push(b);
            }
        }
    };
    push_range(0.5, 1.0, 0.01, false);
    push_range(1.0, 10.0, 0.05, false);
    if beta_max >= 10.0 {
        push_range(10.0, beta_max, 0.1, true);
    }
    out
}

/// Test exponents: {0} ∪ linspace(1/2, β_max, 499).
pub fn test_betas(beta_max: f64) -> Vec<f64> {
    let mut out = alloc::vec![0.0];
    out.extend((0..499).map(|k| 0.5 + (beta_max - 0.5) * k as f64 / 498.0));
    out
}

impl CornerRule {
    pub fn k(&self) -> usize {
        self.nodes.len()
    }

    /// ∫₀¹ f ≈ Σ w_j f(t_j).
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&t, &w)| w * f(t)).sum()
    }

    /// φ_i(t) for all i, by interpolation inside the containing grid panel.
    pub fn eval_basis(&self, t: f64) -> Vec<f64> {
        let mut out = alloc::vec![0.0; self.rank];
        let mut lw = alloc::vec![0.0; GRID_ORDER];
        self.panel_lagrange(t, &mut lw, |g, l| {
            for (i, o) in out.iter_mut().enumerate() {
                *o += l * self.grid_basis[(g, i)];
            }
        });
        out
    }

    /// Grid-panel Lagrange weights for t, reported as (grid index, weight).
    pub fn panel_lagrange<F: FnMut(usize, f64)>(&self, t: f64, scratch: &mut [f64], mut f: F) {
        let t = t.clamp(0.0, 1.0);
        let p = match self.grid_breaks.iter().position(|&b| b > t) {
            Some(0) => 0,
            Some(k) => k - 1,
            None => GRID_PANELS - 1,
        };
        let gl = &self.panel_rule;
        let (a, b) = (self.grid_breaks[p], self.grid_breaks[p + 1]);
        let x = (2.0 * t - a - b) / (b - a);
        lagrange_bary(&gl.nodes, &gl.bary, x, scratch);
        for (q, &l) in scratch.iter().enumerate() {
            f(p * GRID_ORDER + q, l);
        }
    }

    /// Interpolant of scaled samples s_j = f(t_j)√w_j at t.
    pub fn interpolate(&self, scaled: &[f64], t: f64) -> f64 {
        let c = &self.interp * DVector::from_column_slice(scaled);
        self.eval_basis(t).iter().zip(c.iter()).map(|(p, c)| p * c).sum()
    }

    /// Density values on the reference grid from scaled node samples:
    /// G = Φ_grid V, (grid × k).
    pub fn grid_map(&self) -> DMatrix<f64> {
        &self.grid_basis * &self.interp
    }
}

struct Attempt {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    basis: DMatrix<f64>,
    interp: DMatrix<f64>,
    cond_v: f64,
    grid_basis: DMatrix<f64>,
}

fn attempt(u: &DMatrix<f64>, t: &[f64], w: &[f64], r: usize) -> core::result::Result<Attempt, &'static str> {
    let ng = t.len();
    let sw: Vec<f64> = w.iter().map(|x| x.sqrt()).collect();
    let grid_basis = DMatrix::from_fn(ng, r, |g, i| u[(g, i)] / sw[g]);
    let moments = DVector::from_fn(r, |i, _| (0..ng).map(|g| u[(g, i)] * sw[g]).sum());
    let sol = nnls(&grid_basis.transpose(), &moments, 20 * ng).ok_or("nonnegative fit did not converge")?;
    if sol.residual > 1e-10 * moments.norm() {
        return Err("nonnegative fit leaves a moment residual");
    }
    let support: Vec<usize> = (0..ng).filter(|&g| sol.x[g] > 0.0).collect();
    if support.len() != r {
        return Err("support size differs from rank");
    }
    let nodes: Vec<f64> = support.iter().map(|&g| t[g]).collect();
    let weights: Vec<f64> = support.iter().map(|&g| sol.x[g]).collect();
    let basis = DMatrix::from_fn(r, r, |j, i| grid_basis[(support[j], i)] * weights[j].sqrt());
    let svd = basis.clone().svd(false, false);
    let cond_v = svd.singular_values.max() / svd.singular_values.min();
    let interp = basis.clone().try_inverse().ok_or("basis matrix is singular")?;
    Ok(Attempt { nodes, weights, basis, interp, cond_v, grid_basis })
}

fn validate(rule: &mut CornerRule) -> core::result::Result<(), alloc::string::String> {
    let k = rule.k();
    if k > MAX_NODES {
        return Err(format!("{k} nodes exceeds {MAX_NODES}"));
    }
    if rule.weights.iter().any(|&w| !(w > 0.0)) {
        return Err("nonpositive weight".into());
    }
    let sum: f64 = rule.weights.iter().sum();
    if (sum - 1.0).abs() > 1e-13 {
        return Err(format!("weights sum to 1 + {:.2e}", sum - 1.0));
    }
    if !(rule.cond_v <= MAX_COND) {
        return Err(format!("cond(V) = {:.1} exceeds {MAX_COND}", rule.cond_v));
    }
    let g = rule.grid_map();
    let mut qerr: f64 = 0.0;
    let mut ierr: f64 = 0.0;
    for beta in test_betas(rule.beta_max) {
        let pw = |t: f64| if beta == 0.0 { 1.0 } else { t.powf(beta) };
        let approx = rule.integrate(pw);
        qerr = qerr.max((approx - 1.0 / (beta + 1.0)).abs());
        let scaled = DVector::from_iterator(k, rule.nodes.iter().zip(&rule.weights).map(|(&t, &w)| pw(t) * w.sqrt()));
        let recon = &g * scaled;
        let l2: f64 = rule
            .grid_nodes
            .iter()
            .zip(&rule.grid_weights)
            .zip(recon.iter())
            .map(|((&t, &w), &f)| w * (pw(t) - f) * (pw(t) - f))
            .sum();
        ierr = ierr.max(l2.sqrt());
    }
    rule.max_quad_error = qerr;
    rule.max_interp_error = ierr;
    if qerr > EXACTNESS_TOL {
        return Err(format!("quadrature error {qerr:.2e}"));
    }
    if ierr > EXACTNESS_TOL {
        return Err(format!("interpolation error {ierr:.2e}"));
    }
    Ok(())
}

pub fn build_corner_rule(beta_max: f64, tol: f64) -> Result<CornerRule> {
    if !(beta_max >= 1.0) || !(tol > 0.0 && tol < 1.0) {
        return Err(Error::new(
            ErrorKind::Validation,
            "build_corner_rule",
            format!("need beta_max >= 1 and 0 < tol < 1, got {beta_max}, {tol}"),
        ));
    }
    let (breaks, t, w) = reference_grid();
    let betas = beta_samples(beta_max);
    let a = DMatrix::from_fn(t.len(), betas.len(), |g, c| {
        let b = betas[c];
        w[g].sqrt() * if b == 0.0 { 1.0 } else { t[g].powf(b) }
    });
    let svd = a.svd(true, false);
    // nalgebra does not guarantee ordering.
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let u_all = svd.u.expect("left vectors requested");
    let u = u_all.select_columns(order.iter());
    let s0 = svd.singular_values[order[0]];
    let r0 = order.iter().filter(|&&i| svd.singular_values[i] > tol * s0).count();
    let mut last = alloc::string::String::new();
    for r in (r0..=r0 + 10).step_by(2) {
        if r > order.len() {
            break;
        }
        match attempt(&u, &t, &w, r) {
            Ok(at) => {
                let mut rule = CornerRule {
                    beta_max,
                    tol,
                    rank: r,
                    nodes: at.nodes,
                    weights: at.weights,
                    basis: at.basis,
                    interp: at.interp,
                    cond_v: at.cond_v,
                    grid_breaks: breaks.clone(),
                    grid_nodes: t.clone(),
                    grid_weights: w.clone(),
                    grid_basis: at.grid_basis,
                    panel_rule: GaussLegendre::new(GRID_ORDER),
                    max_quad_error: f64::NAN,
                    max_interp_error: f64::NAN,
                };
                match validate(&mut rule) {
                    Ok(()) => {
                        let mut perm: Vec<usize> = (0..rule.k()).collect();
                        perm.sort_by(|&i, &j| rule.nodes[i].total_cmp(&rule.nodes[j]));
                        return Ok(sorted(rule, &perm));
                    }
                    Err(e) => last = format!("rank {r}: {e}"),
                }
            }
            Err(e) => last = format!("rank {r}: {e}"),
        }
    }
    Err(Error::new(
        ErrorKind::RuleValidation,
        "build_corner_rule",
        format!("no rank in {r0}..={} passed validation; last failure at {last}", r0 + 10),
    ))
}

/// Reorder nodes increasingly; V's columns follow the node order.
fn sorted(mut rule: CornerRule, perm: &[usize]) -> CornerRule {
    rule.nodes = perm.iter().map(|&i| rule.nodes[i]).collect();
    rule.weights = perm.iter().map(|&i| rule.weights[i]).collect();
    rule.basis = rule.basis.select_rows(perm.iter());
    rule.interp = rule.interp.select_columns(perm.iter());
    rule
}

#[cfg(test)]
mod tests {
    use super::*;
    extern crate std;
    use std::sync::OnceLock;

    fn rule() -> &'static CornerRule {
        static RULE: OnceLock<CornerRule> = OnceLock::new();
        RULE.get_or_init(|| build_corner_rule(50.0, 1e-13).unwrap())
    }

    #[test]
    fn grid_integrates_half_power() {
        let (_, t, w) = reference_grid();
        let s: f64 = t.iter().zip(&w).map(|(t, w)| w * t.sqrt()).sum();
        assert!((s - 2.0 / 3.0).abs() < 1e-14);
        assert_eq!(t.len(), GRID_PANELS * GRID_ORDER);
    }

    #[test]
    fn beta_grid_shape() {
        let b = beta_samples(50.0);
        assert_eq!(b[0], 0.0);
        assert!((b[1] - 0.5).abs() < 1e-15);
        assert!((b.last().unwrap() - 50.0).abs() < 1e-9);
        assert!(b[1..].windows(2).all(|w| w[1] > w[0] && w[1] - w[0] <= 0.1 + 1e-12));
    }

    #[test]
    fn rule_invariants() {
        let r = rule();
        assert!(r.k() <= MAX_NODES);
        assert!(r.cond_v <= MAX_COND);
        assert!(r.weights.iter().all(|&w| w > 0.0));
        assert!((r.weights.iter().sum::<f64>() - 1.0).abs() <= 1e-13);
        assert!((r.integrate(|t| t) - 0.5).abs() <= 1e-13);
        assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
        assert!(r.nodes.iter().all(|&t| (0.0..=1.0).contains(&t)));
        assert!(r.max_quad_error <= 1e-12 && r.max_interp_error <= 1e-12);
    }

    #[test]
    fn interpolation_off_grid() {
        let r = rule();
        for &beta in &[0.5, 1.0, 2.71, 17.3] {
            let scaled: Vec<f64> = r.nodes.iter().zip(&r.weights).map(|(&t, &w)| t.powf(beta) * w.sqrt()).collect();
            for &t in &[1e-6, 0.013, 0.3, 0.77, 0.999] {
                let f = r.interpolate(&scaled, t);
                assert!((f - t.powf(beta)).abs() < 1e-10, "beta={beta} t={t}");
            }
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(build_corner_rule(0.5, 1e-13).is_err());
        assert!(build_corner_rule(50.0, 0.0).is_err());
    }
}
