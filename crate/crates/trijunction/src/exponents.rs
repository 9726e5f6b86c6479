//! Singular exponents at a triple junction: roots β of det A_dir(a,b,β) =
//! sin(πβ)·α(a,b,c;β), their null vectors, and numerical continuation of the
//! non-integer branches away from the axes a = 0, b = 0, c = 0.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;
use nalgebra::{Matrix3, Vector3};
use num_traits::Float;

use crate::error::{Error, ErrorKind, Result};
use crate::geometry::{third_material, TWO_PI};

/// Relative singular-value threshold counting a direction as null.
pub const NULL_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JunctionParams {
    pub angles: [f64; 3],
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl JunctionParams {
    pub fn new(angles: [f64; 3], a: f64, b: f64) -> Result<Self> {
        let sum: f64 = angles.iter().sum();
        if (sum - TWO_PI).abs() > 1e-13 || angles.iter().any(|&t| !(t > 0.0)) {
            return Err(Error::new(ErrorKind::Validation, "JunctionParams", "angles must be positive and sum to 2π"));
        }
        if !(a.abs() < 1.0 && b.abs() < 1.0) {
            return Err(Error::new(ErrorKind::Validation, "JunctionParams", "a and b must lie in (−1, 1)"));
        }
        Ok(Self { angles, a, b, c: third_material(a, b) })
    }

    /// Angles θ1, θ2 with θ3 = 2π − θ1 − θ2.
    pub fn from_two_angles(theta1: f64, theta2: f64, a: f64, b: f64) -> Result<Self> {
        Self::new([theta1, theta2, TWO_PI - theta1 - theta2], a, b)
    }

    /// Material triple in the vector order (d_(1,2), d_(2,3), d_(3,1)).
    pub fn d(&self) -> [f64; 3] {
        [self.b, self.c, self.a]
    }

    pub fn with_ab(&self, a: f64, b: f64) -> Self {
        Self { a, b, c: third_material(a, b), ..*self }
    }
}

/// sin(πx) with the argument reduced first.
pub fn sin_pi(x: f64) -> f64 {
    let m = x.round();
    let s = (PI * (x - m)).sin();
    if (m as i64) % 2 == 0 {
        s
    } else {
        -s
    }
}

/// α = sin²(πβ) + bc sin²(β(π−θ2)) + ac sin²(β(π−θ3)) + ab sin²(β(π−θ1)).
pub fn alpha(p: &JunctionParams, beta: f64) -> f64 {
    let [t1, t2, t3] = p.angles;
    let s = sin_pi(beta);
    let x = (beta * (PI - t2)).sin();
    let y = (beta * (PI - t3)).sin();
    let z = (beta * (PI - t1)).sin();
    s * s + p.b * p.c * x * x + p.a * p.c * y * y + p.a * p.b * z * z
}

/// dα/dβ.
pub fn alpha_derivative(p: &JunctionParams, beta: f64) -> f64 {
    let [t1, t2, t3] = p.angles;
    let term = |phi: f64| phi * (2.0 * beta * phi).sin();
    PI * sin_pi(2.0 * beta) + p.b * p.c * term(PI - t2) + p.a * p.c * term(PI - t3) + p.a * p.b * term(PI - t1)
}

/// The Dirichlet exponent matrix.
pub fn build_adir(p: &JunctionParams, beta: f64) -> Matrix3<f64> {
    let [t1, t2, t3] = p.angles;
    let s = sin_pi(beta);
    let x = (beta * (PI - t2)).sin();
    let y = (beta * (PI - t3)).sin();
    let z = (beta * (PI - t1)).sin();
    let (a, b, c) = (p.a, p.b, p.c);
    Matrix3::new(s, b * x, -b * z, -c * x, s, c * y, a * z, -a * y, s)
}

/// The Neumann exponent matrix: A_dir with off-diagonal signs flipped.
pub fn build_aneu(p: &JunctionParams, beta: f64) -> Matrix3<f64> {
    let mut m = build_adir(p, beta);
    for i in 0..3 {
        for j in 0..3 {
            if i != j {
                m[(i, j)] = -m[(i, j)];
            }
        }
    }
    m
}

/// Why a branch could not be produced.
#[derive(Clone, Debug, PartialEq)]
pub enum BranchFailure {
    NoSignChange,
    Continuation { last_a: f64, last_b: f64, last_beta: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExponentBranch {
    pub i: usize,
    pub j: usize,
    pub beta: f64,
    pub v: Vector3<f64>,
    pub w: Vector3<f64>,
    pub res_dir: f64,
    pub res_neu: f64,
    pub degenerate: bool,
    /// β > 1/2, as required for the Neumann family t^(β−1).
    pub neumann_admissible: bool,
    pub failure: Option<BranchFailure>,
}

impl ExponentBranch {
    pub fn ok(&self) -> bool {
        self.failure.is_none()
    }
}

fn canonical_sign(mut v: Vector3<f64>) -> Vector3<f64> {
    let k = v.iamax();
    if v[k] < 0.0 {
        v = -v;
    }
    v
}

/// Singular values ascending and the right singular vector of the smallest.
fn null_info(m: &Matrix3<f64>) -> ([f64; 3], Vector3<f64>) {
    let svd = m.svd(false, true);
    let vt = svd.v_t.expect("requested");
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&i, &j| svd.singular_values[i].partial_cmp(&svd.singular_values[j]).unwrap());
    let sv = idx.map(|i| svd.singular_values[i]);
    let mut v = vt.row(idx[0]).transpose().normalize();
    // For a rank-2 matrix the cross product of two rows is a null vector
    // whose residual is set by det(m) alone; keep whichever is better.
    if sv[1] > 0.0 {
        let rows = [m.row(0).transpose(), m.row(1).transpose(), m.row(2).transpose()];
        let cross = [rows[0].cross(&rows[1]), rows[1].cross(&rows[2]), rows[2].cross(&rows[0])];
        let best = cross.iter().max_by(|x, y| x.norm().total_cmp(&y.norm())).unwrap();
        if best.norm() > 0.0 {
            let c = best.normalize();
            if (m * c).norm() < (m * v).norm() {
                v = c;
            }
        }
    }
    (sv, canonical_sign(v))
}

/// Number of singular values below the null threshold.
fn null_dimension(sv: &[f64; 3]) -> usize {
    let scale = sv[2].max(1.0);
    sv.iter().filter(|&&s| s < NULL_TOL * scale).count()
}

/// Multiplicity (1 or "at least 2") of β as a root of det A_dir.
fn root_multiplicity(p: &JunctionParams, beta: f64, integer: bool) -> usize {
    let d = if integer { alpha(p, beta) } else { alpha_derivative(p, beta) };
    if d.abs() < NULL_TOL {
        2
    } else {
        1
    }
}

fn finish(p: &JunctionParams, i: usize, j: usize, beta: f64, v: Option<Vector3<f64>>, integer: bool) -> ExponentBranch {
    let adir = build_adir(p, beta);
    let aneu = build_aneu(p, beta);
    let (sv_d, vd) = null_info(&adir);
    let (sv_n, wn) = null_info(&aneu);
    let v = v.unwrap_or(vd);
    let w = wn;
    let nd = null_dimension(&sv_d).max(null_dimension(&sv_n));
    let mult = root_multiplicity(p, beta, integer);
    ExponentBranch {
        i,
        j,
        beta,
        res_dir: (adir * v).norm(),
        res_neu: (aneu * w).norm(),
        v,
        w,
        degenerate: nd != mult || nd >= 2,
        neumann_admissible: beta > 0.5,
        failure: None,
    }
}

/// β = m with v ∝ (sin mθ3, sin mθ1, sin mθ2).
pub fn integer_branch(p: &JunctionParams, m: usize) -> ExponentBranch {
    let mf = m as f64;
    let [t1, t2, t3] = p.angles;
    let raw = Vector3::new((mf * t3).sin(), (mf * t1).sin(), (mf * t2).sin());
    let v = if raw.norm() > NULL_TOL { Some(canonical_sign(raw.normalize())) } else { None };
    let mut br = finish(p, m, 0, mf, v, true);
    if v.is_none() {
        br.degenerate = true;
    }
    br
}

/// The β = 0 branches with v = w = e_j.
pub fn zero_branch(p: &JunctionParams, j: usize) -> ExponentBranch {
    let e = Vector3::ith(j, 1.0);
    ExponentBranch {
        i: 0,
        j,
        beta: 0.0,
        v: e,
        w: e,
        res_dir: (build_adir(p, 0.0) * e).norm(),
        res_neu: (build_aneu(p, 0.0) * e).norm(),
        degenerate: false,
        neumann_admissible: false,
        failure: None,
    }
}

/// Which of the three axes a parameter point lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    A0,
    B0,
    C0,
}

impl Axis {
    /// δ and θ of the reduced equation sin(πz) = ±δ sin(z(π−θ)).
    pub fn delta_theta(self, p: &JunctionParams) -> (f64, f64) {
        match self {
            Axis::B0 => (p.a.abs(), p.angles[2]),
            Axis::A0 => (p.b.abs(), p.angles[1]),
            Axis::C0 => (p.a.abs(), p.angles[0]),
        }
    }

    /// Orthogonal projection of (a, b) onto the axis.
    pub fn project(self, a: f64, b: f64) -> (f64, f64) {
        match self {
            Axis::A0 => (0.0, b),
            Axis::B0 => (a, 0.0),
            Axis::C0 => (0.5 * (a - b), 0.5 * (b - a)),
        }
    }

    pub fn distance(self, a: f64, b: f64) -> f64 {
        match self {
            Axis::A0 => a.abs(),
            Axis::B0 => b.abs(),
            Axis::C0 => (a + b).abs() / 2.0f64.sqrt(),
        }
    }

    /// Nearest axis, ties broken in the order b = 0, a = 0, c = 0.
    pub fn nearest(a: f64, b: f64) -> Axis {
        let mut best = Axis::B0;
        for ax in [Axis::A0, Axis::C0] {
            if ax.distance(a, b) < best.distance(a, b) {
                best = ax;
            }
        }
        best
    }

    pub fn of(p: &JunctionParams) -> Option<Axis> {
        let on = [(Axis::B0, p.b == 0.0), (Axis::A0, p.a == 0.0), (Axis::C0, p.a + p.b == 0.0)];
        let hits: Vec<Axis> = on.iter().filter(|x| x.1).map(|x| x.0).collect();
        if hits.len() == 1 {
            Some(hits[0])
        } else {
            None
        }
    }
}

/// Root above (`Above`, z⁺ > i) or below (`Below`, z⁻ < i) the integer i.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Below,
    Above,
}

impl Side {
    pub fn label(self) -> usize {
        match self {
            Side::Below => 1,
            Side::Above => 2,
        }
    }
}

/// Solve sin(πz) = s δ sin(z(π−θ)) for the root nearest i on `side`.
/// Returns the root and the equation sign s.
pub fn axis_root(delta: f64, theta: f64, i: usize, side: Side) -> Option<(f64, f64)> {
    let fi = i as f64;
    let sin_it = (fi * theta).sin();
    if delta == 0.0 || sin_it.abs() < 1e-14 {
        return Some((fi, 1.0));
    }
    let dir = if side == Side::Above { 1.0 } else { -1.0 };
    // z − i ≈ −s δ sin(iθ)/π picks the equation sign for each side.
    let s = -dir * sin_it.signum();
    let g = |z: f64| sin_pi(z) - s * delta * (z * (PI - theta)).sin();
    let steps = 4000;
    let h = 1.0 / steps as f64;
    let g0 = g(fi);
    let mut lo = fi;
    let mut found = None;
    for k in 1..=steps {
        let z = fi + dir * h * k as f64;
        if z < 0.0 {
            break;
        }
        if g(z).signum() != g0.signum() {
            found = Some((lo, z));
            break;
        }
        lo = z;
    }
    let (mut x0, mut x1) = found?;
    let g_lo = g(x0);
    for _ in 0..200 {
        let mid = 0.5 * (x0 + x1);
        if mid == x0 || mid == x1 {
            break;
        }
        if g(mid).signum() == g_lo.signum() {
            x0 = mid;
        } else {
            x1 = mid;
        }
    }
    let mut z = 0.5 * (x0 + x1);
    for _ in 0..3 {
        let d = PI * (PI * z).cos() - s * delta * (PI - theta) * (z * (PI - theta)).cos();
        if d.abs() > 1e-12 {
            let step = g(z) / d;
            if step.abs() < 1e-12 {
                z -= step;
            }
        }
    }
    Some((z, s))
}

/// Branch (i, side) on an axis point.
pub fn axis_branch(p: &JunctionParams, i: usize, side: Side) -> Result<ExponentBranch> {
    let axis = Axis::of(p).ok_or_else(|| {
        Error::new(ErrorKind::Domain, "axis_branch", "parameters must lie on exactly one of a=0, b=0, c=0")
    })?;
    let (delta, theta) = axis.delta_theta(p);
    if !(delta < 1.0) {
        return Err(Error::new(ErrorKind::Domain, "axis_branch", "material parameter must lie in (0, 1)"));
    }
    match axis_root(delta, theta, i, side) {
        Some((z, _)) => {
            let integer = z == i as f64;
            Ok(finish(p, i, side.label(), z, None, integer))
        }
        None => Err(Error::new(
            ErrorKind::Continuation,
            "axis_branch",
            format!("no sign change within distance 1 of {i} for delta = {delta}"),
        )),
    }
}

/// Newton on α(β) = 0 from `beta`.
fn newton_alpha(p: &JunctionParams, mut beta: f64) -> Option<f64> {
    for _ in 0..50 {
        let f = alpha(p, beta);
        let d = alpha_derivative(p, beta);
        if d.abs() < 1e-300 {
            return None;
        }
        let step = f / d;
        beta -= step;
        if !beta.is_finite() {
            return None;
        }
        if step.abs() <= 1e-14 * beta.abs().max(1.0) || alpha(p, beta).abs() <= 1e-30 {
            return Some(beta);
        }
    }
    let f = alpha(p, beta);
    if f.abs() <= 1e-14 {
        Some(beta)
    } else {
        None
    }
}

/// Continue a non-integer branch from `seed` (at `seed_ab`) to the target
/// parameters along a straight line in (a, b).
pub fn continue_branch(
    target: &JunctionParams,
    seed: &ExponentBranch,
    seed_ab: (f64, f64),
    steps: usize,
) -> ExponentBranch {
    let (a0, b0) = seed_ab;
    let (a1, b1) = (target.a, target.b);
    if a0 == a1 && b0 == b1 {
        return seed.clone();
    }
    if seed.j == 0 || (a1 == 0.0 && b1 == 0.0) {
        let integer = seed.j == 0 || a1 == 0.0 && b1 == 0.0;
        let beta = if integer { seed.i as f64 } else { seed.beta };
        return finish(target, seed.i, seed.j, beta, None, integer);
    }
    let at = |tau: f64| target.with_ab(a0 + tau * (a1 - a0), b0 + tau * (b1 - b0));
    let mut tau = 0.0;
    let mut beta = seed.beta;
    let mut prev: Option<(f64, f64)> = None;
    let mut h = 1.0 / steps.max(1) as f64;
    let h_min = h / 4096.0;
    while tau < 1.0 {
        let step = h.min(1.0 - tau);
        let next = tau + step;
        let pred = match prev {
            Some((tp, bp)) => beta + (beta - bp) * step / (tau - tp),
            None => beta,
        };
        let guard = 0.05 + 2.0 * prev.map_or(0.0, |(_, bp)| (beta - bp).abs());
        let p = at(next);
        let corrected = newton_alpha(&p, pred).filter(|&bn| (bn - pred).abs() <= guard && bn > 0.0);
        match corrected {
            Some(bn) => {
                prev = Some((tau, beta));
                tau = next;
                beta = bn;
                h = (h * 1.5).min(1.0 / steps.max(1) as f64);
            }
            None => {
                h *= 0.5;
                if h < h_min {
                    let last = at(tau);
                    let mut br = finish(target, seed.i, seed.j, beta, None, false);
                    br.failure = Some(BranchFailure::Continuation { last_a: last.a, last_b: last.b, last_beta: beta });
                    return br;
                }
            }
        }
    }
    finish(target, seed.i, seed.j, beta, None, false)
}

/// Branch (i, j) at `p`, seeded on the nearest axis and continued.
pub fn branch_at(p: &JunctionParams, i: usize, j: usize, steps: usize) -> ExponentBranch {
    if i == 0 {
        return zero_branch(p, j);
    }
    if j == 0 {
        return integer_branch(p, i);
    }
    let side = if j == 1 { Side::Below } else { Side::Above };
    if p.a == 0.0 && p.b == 0.0 {
        return finish(p, i, j, i as f64, None, true);
    }
    let axis = Axis::nearest(p.a, p.b);
    let (sa, sb) = axis.project(p.a, p.b);
    let seed_params = p.with_ab(sa, sb);
    let seed = if sa == 0.0 && sb == 0.0 {
        finish(&seed_params, i, j, i as f64, None, true)
    } else {
        match axis_branch(&seed_params, i, side) {
            Ok(b) => b,
            Err(_) => {
                let mut b = finish(p, i, j, i as f64, None, true);
                b.failure = Some(BranchFailure::NoSignChange);
                return b;
            }
        }
    };
    if seed.beta == i as f64 && (sa != p.a || sb != p.b) {
        // Seed sits on the double root at the origin: step off along the
        // segment before continuing.
        let eps = 1e-3;
        let (ea, eb) = (sa + eps * (p.a - sa), sb + eps * (p.b - sb));
        let near = p.with_ab(ea, eb);
        let guess = i as f64 + if side == Side::Above { 1e-3 } else { -1e-3 };
        if let Some(bn) = newton_alpha(&near, guess) {
            let s2 = finish(&near, i, j, bn, None, false);
            return continue_branch(p, &s2, (ea, eb), 64);
        }
    }
    continue_branch(p, &seed, (sa, sb), steps)
}

/// All branches β_{i,j}, i = 0..=N, j = 0..=2, sorted by β.
pub fn find_branches(p: &JunctionParams, n: usize) -> Vec<ExponentBranch> {
    let mut out = Vec::with_capacity(3 * (n + 1));
    for i in 0..=n {
        for j in 0..3 {
            out.push(branch_at(p, i, j, 64));
        }
    }
    out.sort_by(|x, y| x.beta.partial_cmp(&y.beta).unwrap().then(x.i.cmp(&y.i)).then(x.j.cmp(&y.j)));
    out
}

/// One row of a degeneracy scan.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanRow {
    pub a: f64,
    pub b: f64,
    pub i: usize,
    pub j: usize,
    pub beta: f64,
    pub res_dir: f64,
    pub res_neu: f64,
    pub degenerate: bool,
}

/// Uniform grid of `grid` points on [lo, hi].
pub fn linspace(lo: f64, hi: f64, grid: usize) -> Vec<f64> {
    if grid == 1 {
        return alloc::vec![0.5 * (lo + hi)];
    }
    (0..grid).map(|k| lo + (hi - lo) * k as f64 / (grid - 1) as f64).collect()
}

/// Branches with i ≤ N at every point of a grid × grid lattice in
/// [−lim, lim]² (a outer, b inner).
pub fn degeneracy_scan(angles: [f64; 3], n: usize, grid: usize, lim: f64) -> Result<Vec<ScanRow>> {
    let mut rows = Vec::new();
    for a in linspace(-lim, lim, grid) {
        for b in linspace(-lim, lim, grid) {
            let p = JunctionParams::new(angles, a, b)?;
            for br in find_branches(&p, n) {
                rows.push(ScanRow {
                    a,
                    b,
                    i: br.i,
                    j: br.j,
                    beta: br.beta,
                    res_dir: br.res_dir,
                    res_neu: br.res_neu,
                    degenerate: br.degenerate || br.failure.is_some(),
                });
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn irrational() -> [f64; 3] {
        let t1 = PI / 2.0f64.sqrt();
        let t2 = PI / 3.0f64.sqrt();
        [t1, t2, TWO_PI - t1 - t2]
    }

    #[test]
    fn alpha_decoupled_and_axis_forms() {
        let p = JunctionParams::new(irrational(), 0.0, 0.0).unwrap();
        for beta in [0.3, 1.7, 4.2] {
            assert!((alpha(&p, beta) - sin_pi(beta).powi(2)).abs() < 1e-15);
        }
        let a = 0.6;
        let p = JunctionParams::new(irrational(), a, 0.0).unwrap();
        let t3 = p.angles[2];
        for beta in [0.3, 1.7, 4.2] {
            let expect = sin_pi(beta).powi(2) - a * a * (beta * (PI - t3)).sin().powi(2);
            assert!((alpha(&p, beta) - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn alpha_at_integer_is_limit_of_det_over_sine() {
        let p = JunctionParams::new(irrational(), 0.4, -0.25).unwrap();
        for m in 1..6 {
            let mf = m as f64;
            let h = 1e-5;
            // det/sin(πβ) near m via symmetric difference of det over that of sin
            let d = (build_adir(&p, mf + h).determinant() - build_adir(&p, mf - h).determinant()) / (2.0 * h);
            let s = (sin_pi(mf + h) - sin_pi(mf - h)) / (2.0 * h);
            assert!((d / s - alpha(&p, mf)).abs() < 1e-8);
        }
    }

    #[test]
    fn adir_vanishes_at_zero() {
        let p = JunctionParams::new(irrational(), 0.3, 0.7).unwrap();
        assert_eq!(build_adir(&p, 0.0), Matrix3::zeros());
    }

    #[test]
    fn alpha_derivative_matches_finite_difference() {
        let p = JunctionParams::new(irrational(), -0.5, 0.8).unwrap();
        for beta in [0.6, 2.3, 9.9] {
            let h = 1e-6;
            let fd = (alpha(&p, beta + h) - alpha(&p, beta - h)) / (2.0 * h);
            assert!((fd - alpha_derivative(&p, beta)).abs() < 1e-7);
        }
    }

    proptest! {
        #[test]
        fn det_factorizes(t1 in 0.3f64..3.0, t2 in 0.3f64..3.0, a in -0.99f64..0.99, b in -0.99f64..0.99, beta in 0.0f64..50.0) {
            prop_assume!(TWO_PI - t1 - t2 > 0.2);
            let p = JunctionParams::from_two_angles(t1, t2, a, b).unwrap();
            let d = build_adir(&p, beta).determinant();
            let f = sin_pi(beta) * alpha(&p, beta);
            prop_assert!((d - f).abs() <= 1e-12 * (1.0 + d.abs()));
            prop_assert!((d - build_aneu(&p, beta).determinant()).abs() <= 1e-12 * (1.0 + d.abs()));
        }

        #[test]
        fn integer_null_vectors(a in -0.95f64..0.95, b in -0.95f64..0.95, m in 1usize..11) {
            let p = JunctionParams::new(irrational(), a, b).unwrap();
            let br = integer_branch(&p, m);
            prop_assert!(br.res_dir <= 1e-12);
            prop_assert_eq!(br.beta, m as f64);
        }
    }

    #[test]
    fn rational_angles_flag_degeneracy() {
        let p = JunctionParams::new([TWO_PI / 3.0; 3], 0.3, 0.2).unwrap();
        assert!(integer_branch(&p, 3).degenerate);
        let p0 = JunctionParams::new(irrational(), 0.0, 0.0).unwrap();
        let br = integer_branch(&p0, 2);
        assert!(br.degenerate);
        assert!(build_adir(&p0, 2.0).norm() < 1e-15);
    }

    #[test]
    fn integer_branch_fixed_angles() {
        let p = JunctionParams::new(irrational(), 0.5, -0.3).unwrap();
        let br = integer_branch(&p, 1);
        assert!(br.res_dir <= 1e-13);
        assert!(!br.degenerate);
        assert!(br.res_neu <= 1e-12);
    }

    #[test]
    fn axis_roots_straddle_and_solve() {
        let p = JunctionParams::new(irrational(), 0.5, 0.0).unwrap();
        let t3 = p.angles[2];
        let lo = axis_branch(&p, 1, Side::Below).unwrap();
        let hi = axis_branch(&p, 1, Side::Above).unwrap();
        assert!(lo.beta < 1.0 && hi.beta > 1.0);
        for br in [&lo, &hi] {
            let r = sin_pi(br.beta).abs() - 0.5 * (br.beta * (PI - t3)).sin().abs();
            assert!(r.abs() <= 1e-13);
            assert!(br.res_dir < 1e-11);
        }
        for i in 1..=5 {
            for k in 1..=9 {
                let delta = k as f64 / 10.0;
                let (zm, _) = axis_root(delta, t3, i, Side::Below).unwrap();
                let (zp, _) = axis_root(delta, t3, i, Side::Above).unwrap();
                assert!(zm < i as f64 && zp > i as f64);
            }
            let (z, _) = axis_root(1e-6, t3, i, Side::Above).unwrap();
            assert!((z - i as f64).abs() <= 1e-4);
        }
    }

    #[test]
    fn continuation_round_trip_and_identity() {
        let base = JunctionParams::new(irrational(), 0.4, 0.0).unwrap();
        let seed = axis_branch(&base, 2, Side::Above).unwrap();
        let same = continue_branch(&base, &seed, (0.4, 0.0), 64);
        assert_eq!(same.beta, seed.beta);
        let target = base.with_ab(0.3, 0.35);
        let there = continue_branch(&target, &seed, (0.4, 0.0), 64);
        assert!(there.ok());
        assert!(alpha(&target, there.beta).abs() < 1e-13);
        let back = continue_branch(&base, &there, (0.3, 0.35), 64);
        assert!((back.beta - seed.beta).abs() < 1e-10);
    }

    #[test]
    fn decoupled_branches_are_integers() {
        let p = JunctionParams::new(irrational(), 0.0, 0.0).unwrap();
        let br = find_branches(&p, 3);
        let betas: Vec<f64> = br.iter().map(|b| b.beta).collect();
        assert_eq!(betas, vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 2.0, 2.0, 2.0, 3.0, 3.0, 3.0]);
        assert!(br.iter().filter(|b| b.i > 0).all(|b| b.degenerate));
    }

    #[test]
    fn generic_branch_count_and_residuals() {
        let p = JunctionParams::new(irrational(), 0.35, -0.6).unwrap();
        let br = find_branches(&p, 5);
        assert_eq!(br.len(), 18);
        for b in &br {
            assert!(b.ok(), "{b:?}");
            if !b.degenerate {
                assert!(b.res_dir <= 1e-11 && b.res_neu <= 1e-11, "{b:?}");
            }
        }
        assert!(br.iter().filter(|b| b.i > 0).all(|b| b.neumann_admissible));
    }

    #[test]
    fn sheet_through_four_is_exact_at_origin() {
        let p = JunctionParams::new(irrational(), 0.0, 0.0).unwrap();
        assert_eq!(branch_at(&p, 4, 1, 64).beta, 4.0);
        assert_eq!(branch_at(&p, 4, 2, 64).beta, 4.0);
    }
}
