//! Lawson–Hanson active-set solver for min ‖Ax − b‖ subject to x ≥ 0.

use alloc::vec;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

pub struct NnlsResult {
    pub x: DVector<f64>,
    pub residual: f64,
}

fn solve_on_set(a: &DMatrix<f64>, b: &DVector<f64>, set: &[usize]) -> DVector<f64> {
    let sub = a.select_columns(set.iter());
    let svd = sub.svd(true, true);
    svd.solve(b, 1e-15 * svd.singular_values.max()).expect("svd computed with u and v")
}

pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>, max_iter: usize) -> Option<NnlsResult> {
    let n = a.ncols();
    let mut x = DVector::zeros(n);
    let mut passive = vec![false; n];
    let norm1 = (0..n).map(|j| a.column(j).lp_norm(1)).fold(0.0, f64::max);
    let tol = 10.0 * (a.nrows().max(n) as f64) * f64::EPSILON * norm1;
    let mut iterations = 0;
    loop {
        let w = a.tr_mul(&(b - a * &x));
        let pick = (0..n).filter(|&j| !passive[j] && w[j] > tol).max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(j) = pick else { break };
        passive[j] = true;
        loop {
            iterations += 1;
            if iterations > max_iter {
                return None;
            }
            let set: Vec<usize> = (0..n).filter(|&k| passive[k]).collect();
            let z = solve_on_set(a, b, &set);
            if z.iter().all(|&v| v > 0.0) {
                x.fill(0.0);
                for (&k, &v) in set.iter().zip(z.iter()) {
                    x[k] = v;
                }
                break;
            }
            let mut alpha = f64::INFINITY;
            for (&k, &v) in set.iter().zip(z.iter()) {
                if v <= 0.0 {
                    alpha = alpha.min(x[k] / (x[k] - v));
                }
            }
            for (&k, &v) in set.iter().zip(z.iter()) {
                x[k] += alpha * (v - x[k]);
            }
            let floor = f64::EPSILON * x.amax();
            for &k in &set {
                if x[k] <= floor {
                    x[k] = 0.0;
                    passive[k] = false;
                }
            }
        }
    }
    let residual = (b - a * &x).norm();
    Some(NnlsResult { x, residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_nonnegative_solution() {
        let a = DMatrix::from_row_slice(3, 4, &[1.0, 2.0, 0.5, 0.0, 0.0, 1.0, 1.0, 3.0, 2.0, 0.0, 1.0, 1.0]);
        let x0 = DVector::from_vec(vec![0.5, 0.0, 1.5, 0.0]);
        let b = &a * &x0;
        let r = nnls(&a, &b, 100).unwrap();
        assert!(r.residual < 1e-12);
        assert!(r.x.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn clips_negative_least_squares() {
        let a = DMatrix::identity(2, 2);
        let b = DVector::from_vec(vec![1.0, -2.0]);
        let r = nnls(&a, &b, 100).unwrap();
        assert_eq!(r.x[1], 0.0);
        assert!((r.x[0] - 1.0).abs() < 1e-15);
        assert!((r.residual - 2.0).abs() < 1e-15);
    }
}
