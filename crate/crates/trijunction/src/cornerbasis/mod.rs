//! Local analysis at a junction: the smooth-part matrices C and C_diag, the
//! potential of a singular branch density, the completeness map B from
//! branch coefficients to Taylor data, and the corner quadrature rule.
//!
//! Edge vectors are ordered [(1,2), (2,3), (3,1)].

mod nnls;
pub mod rule;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use num_traits::Float;

use crate::error::{Error, ErrorKind, Result};
use crate::exponents::{build_adir, build_aneu, find_branches, sin_pi, ExponentBranch, JunctionParams};
use crate::geometry::TWO_PI;
use crate::potentials::{segment_dlp_power, segment_slp_grad_power, SegmentPowerQuery};

pub use rule::{build_corner_rule, CornerRule};

/// Which of the two integral equations a density belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Problem {
    Dirichlet,
    Neumann,
}

pub fn build_c(p: &JunctionParams, k: usize) -> Matrix3<f64> {
    let [t1, t2, t3] = p.angles;
    let kf = k as f64;
    let (s1, s2, s3) = ((kf * t1).sin(), (kf * t2).sin(), (kf * t3).sin());
    let [d12, d23, d31] = p.d();
    Matrix3::new(0.0, -d12 * s2, d12 * s1, d23 * s2, 0.0, -d23 * s3, -d31 * s1, d31 * s3, 0.0) / (2.0 * PI)
}

pub fn build_cdiag(p: &JunctionParams, m: usize) -> Matrix3<f64> {
    let [t1, t2, t3] = p.angles;
    let mf = m as f64;
    let g1 = (PI - t1) * (mf * t1).cos();
    let g2 = (PI - t2) * (mf * t2).cos();
    let g3 = (PI - t3) * (mf * t3).cos();
    let [d12, d23, d31] = p.d();
    Matrix3::new(PI, d12 * g2, -d12 * g1, -d23 * g2, PI, d23 * g3, d31 * g1, -d31 * g3, PI) / (-2.0 * PI)
}

/// Counterclockwise angle from source edge `src` to target edge `tgt`
/// (vector indices), in (0, 2π).
pub fn edge_angle(angles: [f64; 3], src: usize, tgt: usize) -> f64 {
    let [t1, t2, t3] = angles;
    match (src, tgt) {
        (1, 0) => TWO_PI - t2,
        (2, 0) => t1,
        (0, 1) => t2,
        (2, 1) => TWO_PI - t3,
        (0, 2) => TWO_PI - t1,
        (1, 2) => t3,
        _ => panic!("edge_angle needs two distinct edges"),
    }
}

/// Series form of the junction operator applied to a branch density.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchPotential {
    /// Operator values per t, one 3-vector per edge triple.
    pub values: Vec<Vector3<f64>>,
    /// Norm of the coefficient of t^β (t^(β−1) for Neumann), or of
    /// t^m log t (t^(m−1) log t) for integer β; zero for a true branch.
    pub singular: f64,
}

fn is_integer(beta: f64) -> Option<usize> {
    let m = beta.round();
    if (beta - m).abs() <= crate::potentials::INTEGER_PROXIMITY && m >= 0.0 {
        Some(m as usize)
    } else {
        None
    }
}

/// Closed-form series of the junction operator applied to one branch
/// density: Σ smooth.1 t^smooth.0 + singular·t^power (times log t if `log`).
#[derive(Clone, Debug, PartialEq)]
pub struct BranchSeries {
    pub smooth: Vec<(i32, Vector3<f64>)>,
    pub singular: Vector3<f64>,
    pub power: f64,
    pub log: bool,
}

impl BranchSeries {
    pub fn eval(&self, t: f64) -> Vector3<f64> {
        let mut acc = Vector3::zeros();
        for (pw, c) in &self.smooth {
            acc += c * t.powi(*pw);
        }
        acc + self.singular_at(t)
    }

    pub fn singular_at(&self, t: f64) -> Vector3<f64> {
        let f = t.powf(self.power);
        self.singular * if self.log { f * t.ln() } else { f }
    }
}

/// Series for v t^β (Dirichlet) or w t^(β−1) (Neumann) truncated after
/// `terms` powers.
pub fn branch_series(p: &JunctionParams, beta: f64, vec: &Vector3<f64>, terms: usize, problem: Problem) -> BranchSeries {
    let (sgn, shift, a) = match problem {
        Problem::Dirichlet => (1.0, 0, build_adir(p, beta)),
        Problem::Neumann => (-1.0, 1, build_aneu(p, beta)),
    };
    let int = is_integer(beta);
    let singular = match int {
        Some(m) => {
            let sign_m = if m % 2 == 0 { 1.0 } else { -1.0 };
            -(a * vec) * (sign_m / (2.0 * PI))
        }
        None => -(a * vec) / (2.0 * sin_pi(beta)),
    };
    let mut smooth: Vec<(i32, Vector3<f64>)> = Vec::with_capacity(terms + 1);
    for k in 0..=terms {
        let c = if int == Some(k) {
            let cd = build_cdiag(p, k) * vec;
            match problem {
                Problem::Dirichlet => cd,
                Problem::Neumann => -(cd + vec),
            }
        } else if k == 0 {
            continue;
        } else {
            build_c(p, k) * vec / (beta - k as f64) * sgn
        };
        smooth.push((k as i32 - shift, c));
    }
    BranchSeries { smooth, singular, power: beta - shift as f64, log: int.is_some() }
}

/// Junction operator applied to v t^β (Dirichlet) or w t^(β−1) (Neumann)
/// using the closed-form series truncated after `terms` powers.
pub fn potential_of_power_density(
    p: &JunctionParams,
    beta: f64,
    vec: &Vector3<f64>,
    ts: &[f64],
    terms: usize,
    problem: Problem,
) -> BranchPotential {
    let series = branch_series(p, beta, vec, terms, problem);
    BranchPotential { values: ts.iter().map(|&t| series.eval(t)).collect(), singular: series.singular.norm() }
}

/// The junction operator applied to Σ_b coef_b·vec_b·t^(β_b) (Dirichlet) or
/// t^(β_b − 1) (Neumann), evaluated edge by edge from the segment formulas.
pub fn junction_potential_direct(
    p: &JunctionParams,
    terms: &[(f64, Vector3<f64>, f64)],
    t: f64,
    problem: Problem,
) -> Result<Vector3<f64>> {
    let d = p.d();
    let mut out = Vector3::zeros();
    for tgt in 0..3 {
        let mut acc = 0.0;
        for &(beta, ref v, coef) in terms {
            let own = match problem {
                Problem::Dirichlet => t.powf(beta),
                Problem::Neumann => t.powf(beta - 1.0),
            };
            acc += -0.5 * coef * v[tgt] * own;
            for src in 0..3 {
                if src == tgt {
                    continue;
                }
                let q = SegmentPowerQuery { beta, theta0: edge_angle(p.angles, src, tgt), t, tol: 1e-17 };
                let val = match problem {
                    Problem::Dirichlet => segment_dlp_power(&q)?.value,
                    Problem::Neumann => segment_slp_grad_power(&q)?.value,
                };
                acc += d[tgt] * coef * v[src] * val;
            }
        }
        out[tgt] = acc;
    }
    Ok(out)
}

/// Map from branch coefficients to monomial coefficients of the boundary
/// data on the three edges.
#[derive(Clone, Debug, PartialEq)]
pub struct CompletenessMatrix {
    pub n: usize,
    pub problem: Problem,
    /// 3(N+1) × 3(N+1); row 3k+e is the t^k coefficient on edge e, column
    /// 3i+j is branch (i, j) (i shifted by one for Neumann).
    pub matrix: DMatrix<f64>,
    pub branches: Vec<ExponentBranch>,
    pub conditioning: f64,
}

impl CompletenessMatrix {
    /// 3×3 block (row degree i, column family j).
    pub fn block(&self, i: usize, j: usize) -> Matrix3<f64> {
        self.matrix.fixed_view::<3, 3>(3 * i, 3 * j).into_owned()
    }

    /// Rows grouped by edge then degree, columns by sub-branch j then family i.
    pub fn permuted(&self) -> DMatrix<f64> {
        let n1 = self.n + 1;
        DMatrix::from_fn(3 * n1, 3 * n1, |r, c| {
            let (edge, deg) = (r / n1, r % n1);
            let (j, i) = (c / n1, c % n1);
            self.matrix[(3 * deg + edge, 3 * i + j)]
        })
    }
}

/// Column of B for one branch: its series coefficients of degree 0..=N.
fn completeness_column(p: &JunctionParams, br: &ExponentBranch, n: usize, problem: Problem) -> DVector<f64> {
    let vec = match problem {
        Problem::Dirichlet => br.v,
        Problem::Neumann => br.w,
    };
    let series = branch_series(p, br.beta, &vec, n + 1, problem);
    let mut col = DVector::zeros(3 * (n + 1));
    for (pw, c) in &series.smooth {
        if (0..=n as i32).contains(pw) {
            col.fixed_rows_mut::<3>(3 * *pw as usize).copy_from(c);
        }
    }
    col
}

/// Singular values ratio of a dense matrix.
pub fn condition_2norm(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    max / min
}

/// Branches for the completeness map: i = 0..=N (Dirichlet) or 1..=N+1
/// (Neumann), ordered by (i, j). At a = b = 0 all null vectors are e_j.
pub fn completeness_branches(p: &JunctionParams, n: usize, problem: Problem) -> Vec<ExponentBranch> {
    let (lo, hi) = match problem {
        Problem::Dirichlet => (0, n),
        Problem::Neumann => (1, n + 1),
    };
    let mut all: Vec<ExponentBranch> = find_branches(p, hi).into_iter().filter(|b| b.i >= lo).collect();
    all.sort_by_key(|b| (b.i, b.j));
    if p.a == 0.0 && p.b == 0.0 {
        for b in &mut all {
            b.v = Vector3::ith(b.j, 1.0);
            b.w = b.v;
        }
    }
    all
}

pub fn build_completeness(p: &JunctionParams, n: usize, problem: Problem) -> Result<CompletenessMatrix> {
    let branches = completeness_branches(p, n, problem);
    if let Some(b) = branches.iter().find(|b| !b.ok()) {
        return Err(Error::new(
            ErrorKind::Continuation,
            "build_completeness",
            format!("branch ({}, {}) could not be continued to (a, b) = ({}, {})", b.i, b.j, p.a, p.b),
        ));
    }
    let dim = 3 * (n + 1);
    let mut matrix = DMatrix::zeros(dim, dim);
    for (c, br) in branches.iter().enumerate() {
        matrix.set_column(c, &completeness_column(p, br, n, problem));
    }
    let conditioning = condition_2norm(&matrix);
    if !(conditioning <= 1e12) {
        let culprit = branches.iter().find(|b| b.degenerate).or_else(|| branches.first()).unwrap();
        return Err(Error::new(
            ErrorKind::Degenerate,
            "build_completeness",
            format!(
                "completeness matrix is singular (condition {conditioning:.2e}); suspect branch ({}, {}) with beta = {}",
                culprit.i, culprit.j, culprit.beta
            ),
        ));
    }
    Ok(CompletenessMatrix { n, problem, matrix, branches, conditioning })
}

/// Monomial boundary data: coeffs[e][k] multiplies t^k on edge e.
#[derive(Clone, Debug, PartialEq)]
pub struct PolynomialData {
    pub n: usize,
    pub coeffs: [Vec<f64>; 3],
}

impl PolynomialData {
    pub fn eval(&self, t: f64) -> Vector3<f64> {
        Vector3::from_fn(|e, _| self.coeffs[e].iter().rev().fold(0.0, |acc, c| acc * t + c))
    }

    fn stacked(&self) -> DVector<f64> {
        DVector::from_fn(3 * (self.n + 1), |r, _| self.coeffs[r % 3].get(r / 3).copied().unwrap_or(0.0))
    }
}

/// Branch coefficients p with B p = h.
pub fn solve_corner_coeffs(b: &CompletenessMatrix, h: &PolynomialData) -> Result<DVector<f64>> {
    let rhs = h.stacked();
    let lu = b.matrix.clone().lu();
    let sol = lu.solve(&rhs).ok_or_else(|| {
        Error::new(ErrorKind::Degenerate, "solve_corner_coeffs", "completeness matrix is singular")
    })?;
    let res = (&b.matrix * &sol - &rhs).norm();
    if res > 1e-12 * rhs.norm().max(f64::MIN_POSITIVE) && rhs.norm() > 0.0 {
        return Err(Error::new(
            ErrorKind::Degenerate,
            "solve_corner_coeffs",
            format!("residual {res:.2e} exceeds 1e-12 relative"),
        ));
    }
    Ok(sol)
}

/// Terms (β, vector, coefficient) of the density reconstructed from p.
pub fn density_terms(b: &CompletenessMatrix, coeffs: &DVector<f64>) -> Vec<(f64, Vector3<f64>, f64)> {
    b.branches
        .iter()
        .zip(coeffs.iter())
        .map(|(br, &c)| {
            let v = match b.problem {
                Problem::Dirichlet => br.v,
                Problem::Neumann => br.w,
            };
            (br.beta, v, c)
        })
        .collect()
}

/// Least-squares slope of log y against log x.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Truncation for series evaluation of B-derived densities.
pub fn series_terms(n: usize) -> usize {
    (4 * n).max(60)
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// h − B p accumulated in double-double.
fn compensated_residual(b: &DMatrix<f64>, p: &DVector<f64>, h: &DVector<f64>) -> DVector<f64> {
    DVector::from_fn(h.len(), |r, _| {
        let (mut hi, mut lo) = (h[r], 0.0);
        for c in 0..p.len() {
            let prod = -b[(r, c)] * p[c];
            let err = (-b[(r, c)]).mul_add(p[c], -prod);
            let (s, e) = two_sum(hi, prod);
            hi = s;
            lo += e + err;
        }
        hi + lo
    })
}

/// Residual max_e |h − K[σ]| at each t for the density solving B p = h,
/// accumulated power by power from the branch series so that the matched
/// Taylor part cancels exactly rather than through rounding. The solution
/// is carried as p + δ with δ from one compensated refinement step.
pub fn completeness_residuals(
    b: &CompletenessMatrix,
    p: &JunctionParams,
    h: &PolynomialData,
    ts: &[f64],
) -> Result<Vec<f64>> {
    let coeffs = solve_corner_coeffs(b, h)?;
    let rhs = h.stacked();
    let e = compensated_residual(&b.matrix, &coeffs, &rhs);
    let delta = b.matrix.clone().lu().solve(&e).unwrap_or_else(|| DVector::zeros(e.len()));
    let matched = e - &b.matrix * &delta;
    let terms = series_terms(b.n);
    let series: Vec<BranchSeries> = b
        .branches
        .iter()
        .map(|br| {
            let v = match b.problem {
                Problem::Dirichlet => br.v,
                Problem::Neumann => br.w,
            };
            branch_series(p, br.beta, &v, terms, b.problem)
        })
        .collect();
    // Coefficients of t^pw for pw beyond the matched degrees.
    let mut tail: Vec<(i32, Vector3<f64>)> = Vec::new();
    for (s, (&c, &d)) in series.iter().zip(coeffs.iter().zip(delta.iter())) {
        for (pw, v) in &s.smooth {
            if *pw > b.n as i32 {
                match tail.iter_mut().find(|(q, _)| q == pw) {
                    Some((_, acc)) => *acc -= v * (c + d),
                    None => tail.push((*pw, -v * (c + d))),
                }
            }
        }
    }
    let out = ts
        .iter()
        .map(|&t| {
            let mut r = Vector3::zeros();
            for k in 0..=b.n {
                r += matched.fixed_rows::<3>(3 * k) * t.powi(k as i32);
            }
            for (pw, c) in &tail {
                r += c * t.powi(*pw);
            }
            for (s, &c) in series.iter().zip(coeffs.iter()) {
                r -= s.singular_at(t) * c;
            }
            r.amax()
        })
        .collect();
    Ok(out)
}

/// The same residual evaluated pointwise from the edge-by-edge segment
/// formulas; limited by cancellation to roughly 1e-15 absolute.
pub fn completeness_residuals_direct(
    b: &CompletenessMatrix,
    p: &JunctionParams,
    h: &PolynomialData,
    ts: &[f64],
) -> Result<Vec<f64>> {
    let coeffs = solve_corner_coeffs(b, h)?;
    let terms = density_terms(b, &coeffs);
    let mut out = vec![0.0; ts.len()];
    for (o, &t) in out.iter_mut().zip(ts) {
        let k = junction_potential_direct(p, &terms, t, b.problem)?;
        *o = (h.eval(t) - k).amax();
    }
    Ok(out)
}
