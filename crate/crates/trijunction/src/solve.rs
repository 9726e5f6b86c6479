//! Dense LU and unrestarted GMRES for the Nyström systems, plus 2-norm
//! conditioning.

use alloc::format;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
use num_traits::Float;

use crate::discretize::NystromSystem;
use crate::error::{Error, ErrorKind, Result};

pub const DEFAULT_TOL: f64 = 5e-15;
pub const MAX_SVD_SIZE: usize = 20000;
/// Restarts from the true residual when the Arnoldi estimate drifts.
const REFINEMENT_CYCLES: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Lu,
    Gmres,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Lu => "lu",
            Method::Gmres => "gmres",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    /// ‖Mx − b‖ / ‖b‖ recomputed from the returned solution.
    pub residual: f64,
    pub method: Method,
    /// Wall time in seconds; filled in by callers that own a clock.
    pub elapsed: f64,
}

fn relative_residual<F: Fn(&DVector<f64>) -> DVector<f64>>(apply: &F, x: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let bn = b.norm();
    let r = (apply(x) - b).norm();
    if bn == 0.0 {
        r
    } else {
        r / bn
    }
}

/// One unrestarted GMRES run from x0 = 0; returns the iterate and the
/// number of Arnoldi steps.
fn gmres_cycle<F: Fn(&DVector<f64>) -> DVector<f64>>(apply: &F, b: &DVector<f64>, tol: f64, max_iter: usize) -> (DVector<f64>, usize) {
    let n = b.len();
    let beta = b.norm();
    if beta == 0.0 {
        return (DVector::zeros(n), 0);
    }
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(max_iter + 1);
    basis.push(b / beta);
    let mut h: Vec<Vec<f64>> = Vec::with_capacity(max_iter);
    let mut cs: Vec<f64> = Vec::new();
    let mut sn: Vec<f64> = Vec::new();
    let mut g = alloc::vec![beta];
    let mut k = 0;
    while k < max_iter {
        let mut w = apply(&basis[k]);
        let mut col = alloc::vec![0.0; k + 2];
        for (i, v) in basis.iter().enumerate() {
            let hij = w.dot(v);
            w.axpy(-hij, v, 1.0);
            col[i] = hij;
        }
        // Second pass keeps the basis orthogonal near machine precision.
        for (i, v) in basis.iter().enumerate() {
            let c = w.dot(v);
            w.axpy(-c, v, 1.0);
            col[i] += c;
        }
        let wn = w.norm();
        col[k + 1] = wn;
        for i in 0..k {
            let t = cs[i] * col[i] + sn[i] * col[i + 1];
            col[i + 1] = -sn[i] * col[i] + cs[i] * col[i + 1];
            col[i] = t;
        }
        let r = col[k].hypot(col[k + 1]);
        let (c, s) = if r == 0.0 { (1.0, 0.0) } else { (col[k] / r, col[k + 1] / r) };
        cs.push(c);
        sn.push(s);
        col[k] = r;
        col[k + 1] = 0.0;
        g.push(-s * g[k]);
        g[k] *= c;
        h.push(col);
        k += 1;
        if g[k].abs() <= tol * beta || wn == 0.0 {
            break;
        }
        basis.push(w / wn);
    }
    let mut y = alloc::vec![0.0; k];
    for i in (0..k).rev() {
        let mut s = g[i];
        for j in i + 1..k {
            s -= h[j][i] * y[j];
        }
        y[i] = s / h[i][i];
    }
    let mut x = DVector::zeros(n);
    for (i, yi) in y.iter().enumerate() {
        x.axpy(*yi, &basis[i], 1.0);
    }
    (x, k)
}

/// Unrestarted GMRES with a few refinement cycles on the true residual.
/// Returns the best iterate and its report even when `tol` is not met.
pub fn gmres<F: Fn(&DVector<f64>) -> DVector<f64>>(apply: F, b: &DVector<f64>, tol: f64, max_iter: usize) -> (DVector<f64>, SolveReport) {
    let (mut x, mut iters) = gmres_cycle(&apply, b, tol, max_iter);
    let mut res = relative_residual(&apply, &x, b);
    for _ in 0..REFINEMENT_CYCLES {
        if res <= tol || iters >= max_iter {
            break;
        }
        let r = b - apply(&x);
        let bn = b.norm();
        let inner_tol = (tol * bn / r.norm()).min(0.5);
        let (dx, k) = gmres_cycle(&apply, &r, inner_tol, max_iter - iters);
        iters += k;
        let cand = &x + dx;
        let cres = relative_residual(&apply, &cand, b);
        if cres >= res {
            break;
        }
        x = cand;
        res = cres;
    }
    (x, SolveReport { iterations: iters, residual: res, method: Method::Gmres, elapsed: 0.0 })
}

fn lu_solve(m: &DMatrix<f64>, b: &DVector<f64>, op: &'static str) -> Result<DVector<f64>> {
    m.clone()
        .lu()
        .solve(b)
        .ok_or_else(|| Error::new(ErrorKind::Solver, op, "matrix is singular to working precision"))
}

fn finish(op: &'static str, x: DVector<f64>, report: SolveReport, tol: f64) -> Result<(DVector<f64>, SolveReport)> {
    if report.method == Method::Gmres && !(report.residual <= tol) {
        return Err(Error::new(
            ErrorKind::Solver,
            op,
            format!(
                "GMRES stagnated after {} iterations at relative residual {:.3e} (tolerance {:.1e})",
                report.iterations, report.residual, tol
            ),
        ));
    }
    Ok((x, report))
}

/// Solve M̃ σ̄ = rhs.
pub fn solve_dirichlet(sys: &NystromSystem, rhs: &DVector<f64>, method: Method, tol: f64) -> Result<(DVector<f64>, SolveReport)> {
    let apply = |x: &DVector<f64>| sys.apply(x);
    match method {
        Method::Lu => {
            let x = lu_solve(&sys.matrix, rhs, "solve_dirichlet")?;
            let residual = relative_residual(&apply, &x, rhs);
            Ok((x, SolveReport { iterations: 0, residual, method, elapsed: 0.0 }))
        }
        Method::Gmres => {
            let (x, rep) = gmres(apply, rhs, tol, sys.n());
            finish("solve_dirichlet", x, rep, tol)
        }
    }
}

/// Solve (−I/2 + Δ X̃ᵀ) ρ̄ = rhs, the transposed discretization.
pub fn solve_neumann_transpose(sys: &NystromSystem, rhs: &DVector<f64>, method: Method, tol: f64) -> Result<(DVector<f64>, SolveReport)> {
    let apply = |x: &DVector<f64>| sys.apply_adjoint(x);
    match method {
        Method::Lu => {
            let x = lu_solve(&sys.adjoint_matrix(), rhs, "solve_neumann_transpose")?;
            let residual = relative_residual(&apply, &x, rhs);
            Ok((x, SolveReport { iterations: 0, residual, method, elapsed: 0.0 }))
        }
        Method::Gmres => {
            let (x, rep) = gmres(apply, rhs, tol, sys.n());
            finish("solve_neumann_transpose", x, rep, tol)
        }
    }
}

/// s_max / s_min of a dense matrix by full SVD.
pub fn condition_number(m: &DMatrix<f64>) -> Result<f64> {
    if m.nrows() > MAX_SVD_SIZE || m.ncols() > MAX_SVD_SIZE {
        return Err(Error::new(
            ErrorKind::SizeExceeded,
            "condition_number",
            format!("{}x{} exceeds the dense SVD limit of {MAX_SVD_SIZE}; sweep at a coarser discretization", m.nrows(), m.ncols()),
        ));
    }
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(max / min)
}
