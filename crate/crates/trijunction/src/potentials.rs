//! Layer potentials, closed-form series for power-law densities on a
//! segment, and product integration for near-field interactions.
//!
//! Conventions: S has kernel −log|x−y|/(2π); D has kernel
//! K(x,y) = n(x)·(y−x)/(2π|x−y|²) with x the source; D* has kernel K(y,x)
//! evaluated with the target normal.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_traits::Float;

use crate::error::{Error, ErrorKind, Result};
use crate::geometry::{perp_normal, segment_distance, Vec2};
use crate::quad::{adaptive_vec, GaussLegendre};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelPoint {
    pub source: Vec2,
    pub target: Vec2,
    pub source_normal: Vec2,
    pub target_normal: Vec2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LayerKind {
    S,
    D,
    DAdj,
}

/// K(x,y) = n(x)·(y−x) / (2π|x−y|²).
pub fn kernel_k(p: &KernelPoint) -> Result<f64> {
    let r = p.target - p.source;
    let r2 = r.norm_squared();
    if r2 == 0.0 {
        return Err(Error::new(ErrorKind::Domain, "kernel_K", "source and target coincide"));
    }
    Ok(p.source_normal.dot(&r) / (2.0 * PI * r2))
}

/// Kernel of `kind` for source `x` (normal `nx`) and target `y` (normal `ny`).
#[inline]
pub fn layer_kernel(kind: LayerKind, x: Vec2, nx: Vec2, y: Vec2, ny: Vec2) -> f64 {
    let r = y - x;
    let r2 = r.norm_squared();
    match kind {
        LayerKind::S => -0.25 * r2.ln() / PI,
        LayerKind::D => nx.dot(&r) / (2.0 * PI * r2),
        LayerKind::DAdj => -ny.dot(&r) / (2.0 * PI * r2),
    }
}

/// A straight panel carrying Gauss–Legendre nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct SourcePanel {
    pub a: Vec2,
    pub b: Vec2,
    pub normal: Vec2,
    pub points: Vec<Vec2>,
    pub weights: Vec<f64>,
}

impl SourcePanel {
    pub fn new(a: Vec2, b: Vec2, rule: &GaussLegendre) -> Self {
        let len = (b - a).norm();
        let (u, w) = rule.mapped(0.0, 1.0);
        SourcePanel {
            a,
            b,
            normal: perp_normal(b - a),
            points: u.iter().map(|&s| a + (b - a) * s).collect(),
            weights: w.iter().map(|&w| w * len).collect(),
        }
    }

    pub fn length(&self) -> f64 {
        (self.b - self.a).norm()
    }
}

/// Split segment [a, b] into `n` equal panels of order `q`.
pub fn panelize_segment(a: Vec2, b: Vec2, n: usize, q: usize) -> Vec<SourcePanel> {
    let rule = GaussLegendre::new(q);
    (0..n)
        .map(|k| {
            let p0 = a + (b - a) * (k as f64 / n as f64);
            let p1 = a + (b - a) * ((k + 1) as f64 / n as f64);
            SourcePanel::new(p0, p1, &rule)
        })
        .collect()
}

/// Panels on every side of a closed polygon listed in order.
pub fn panelize_polygon(vertices: &[Vec2], n: usize, q: usize) -> Vec<SourcePanel> {
    let mut out = Vec::new();
    for i in 0..vertices.len() {
        out.extend(panelize_segment(vertices[i], vertices[(i + 1) % vertices.len()], n, q));
    }
    out
}

/// Far-field quadrature of S, D or D* for densities given at panel nodes
/// (one slice per panel). Targets within 3 panel lengths are refused.
pub fn eval_layer(
    panels: &[SourcePanel],
    density: &[Vec<f64>],
    target: Vec2,
    target_normal: Vec2,
    kind: LayerKind,
) -> Result<f64> {
    let mut acc = 0.0;
    for (p, dens) in panels.iter().zip(density) {
        let dist = segment_distance(target, p.a, p.b);
        if dist < 3.0 * p.length() {
            return Err(Error::new(
                ErrorKind::TooClose,
                "eval_layer",
                format!(
                    "target at distance {dist:.3e} is within 3 panel lengths; use adaptive product integration"
                ),
            ));
        }
        for ((x, w), s) in p.points.iter().zip(&p.weights).zip(dens) {
            acc += layer_kernel(kind, *x, p.normal, target, target_normal) * w * s;
        }
    }
    Ok(acc)
}

/// Weights W_j with ∫_[a,b] kernel(x(s), y) ℓ_j(s) ds = W_j, where ℓ_j are
/// the Lagrange basis functions on `rule` mapped to the segment [a, b].
pub fn lagrange_product_weights(
    a: Vec2,
    b: Vec2,
    rule: &GaussLegendre,
    target: Vec2,
    target_normal: Vec2,
    kind: LayerKind,
    integrator: &GaussLegendre,
    tol: f64,
) -> Result<Vec<f64>> {
    let n = rule.len();
    let normal = perp_normal(b - a);
    let half = 0.5 * (b - a).norm();
    let mid = (a + b) * 0.5;
    let dir = (b - a) * 0.5;
    let mut basis = vec![0.0; n];
    let mut f = |u: f64, out: &mut [f64]| {
        let x = mid + dir * u;
        let k = layer_kernel(kind, x, normal, target, target_normal) * half;
        rule.lagrange(u, &mut basis);
        for (o, l) in out.iter_mut().zip(&basis) {
            *o = k * l;
        }
    };
    adaptive_vec(integrator, &mut f, -1.0, 1.0, n, tol, 52).map_err(|e| {
        Error::new(
            ErrorKind::Quadrature,
            "lagrange_product_weights",
            format!("adaptive product integration did not converge near u in [{:.3e}, {:.3e}]", e.a, e.b),
        )
    })
}

/// Series value with the bookkeeping of its truncation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    pub terms: usize,
    pub tail_bound: f64,
}

/// Target at radius `t` and angle `theta0` off a unit segment carrying
/// density s^β (double layer) or s^(β−1) (normal derivative of S).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SegmentPowerQuery {
    pub beta: f64,
    pub theta0: f64,
    pub t: f64,
    pub tol: f64,
}

/// Distance to an integer below which the log branch is used.
pub const INTEGER_PROXIMITY: f64 = 1e-9;

const MAX_TERMS: usize = 1_000_000;

fn series_terms(beta: f64, t: f64, tol: f64) -> usize {
    let k = ((tol * (1.0 - t)).ln() / t.ln()).ceil();
    let k = if k.is_finite() && k > 0.0 { k as usize } else { 1 };
    k.max(beta.ceil() as usize + 2).min(MAX_TERMS)
}

/// sin(x) − x without cancellation for small |x|.
fn sin_minus_x(x: f64) -> f64 {
    if x.abs() > 0.5 {
        return x.sin() - x;
    }
    let x2 = x * x;
    let mut term = -x * x2 / 6.0;
    let mut sum = term;
    let mut k = 3.0;
    while term.abs() > 1e-18 * sum.abs() {
        term *= -x2 / ((k + 1.0) * (k + 2.0));
        sum += term;
        k += 2.0;
    }
    sum
}

fn check_query(q: &SegmentPowerQuery, op: &'static str) -> Result<()> {
    let dom = |d: &str| Err(Error::new(ErrorKind::Domain, op, d));
    if !(q.t > 0.0) {
        return dom("t must be positive");
    }
    if q.t >= 1.0 {
        return dom("t must be below 1 for the series to converge");
    }
    if !(q.tol > 0.0) {
        return dom("tolerance must be positive");
    }
    if q.t > 0.95 && q.tol < 1e-14 {
        return dom("tolerance below 1e-14 cannot be met for t > 0.95");
    }
    if !(q.beta >= 0.0) || !q.beta.is_finite() || !q.theta0.is_finite() {
        return dom("beta must be finite and nonnegative");
    }
    Ok(())
}

/// Double layer of s^β on the unit segment from the origin along angle 0
/// (normal rotated counterclockwise from the direction), evaluated at
/// t(cos θ0, sin θ0).
pub fn segment_dlp_power(q: &SegmentPowerQuery) -> Result<SeriesValue> {
    check_query(q, "segment_dlp_power")?;
    let SegmentPowerQuery { beta, theta0, t, tol } = *q;
    let terms = series_terms(beta, t, tol);
    let tail_bound = t.powi(terms as i32 + 1) / ((1.0 - t) * 2.0 * PI);
    if theta0 == PI {
        return Ok(SeriesValue { value: 0.0, terms, tail_bound });
    }
    let mf = beta.round();
    let m = mf as usize;
    let eps = beta - mf;
    let phi = PI - theta0;
    let sign_m = if m % 2 == 0 { 1.0 } else { -1.0 };
    let integer = eps.abs() <= INTEGER_PROXIMITY;
    let combined = !integer && m >= 1 && eps.abs() < 0.1;
    let mut series = 0.0;
    for k in 1..=terms {
        if (integer || combined) && k == m {
            continue;
        }
        let kf = k as f64;
        let denom = if integer { mf - kf } else { beta - kf };
        series += (kf * theta0).sin() / denom * t.powi(k as i32);
    }
    series /= 2.0 * PI;
    let tm = t.powi(m as i32);
    let value = if integer {
        phi * (mf * theta0).cos() / (2.0 * PI) * tm - (mf * theta0).sin() / (2.0 * PI) * tm * t.ln() + series
    } else {
        let h = 2.0 * sign_m * (PI * eps).sin();
        let a = (beta * phi).sin() / h;
        if combined {
            // The t^β pole and the k = m series pole cancel; combine them.
            let s_m = (mf * theta0).sin();
            let g_c = (mf * phi).cos();
            let half = 0.5 * eps * phi;
            let d1 = sin_minus_x(PI * eps) + PI * eps * 2.0 * half.sin() * half.sin();
            let num = 2.0 * sign_m * s_m * d1 + 2.0 * PI * eps * g_c * (eps * phi).sin();
            let r = num / (2.0 * PI * eps * h);
            a * tm * (eps * t.ln()).exp_m1() + r * tm + series
        } else {
            a * t.powf(beta) + series
        }
    };
    Ok(SeriesValue { value, terms, tail_bound })
}

/// Normal derivative of the single layer of s^(β−1) on the same segment,
/// with the target normal (−sin θ0, cos θ0). Equals −D[s^β]/t termwise.
pub fn segment_slp_grad_power(q: &SegmentPowerQuery) -> Result<SeriesValue> {
    check_query(q, "segment_slp_grad_power")?;
    if q.beta < 0.5 {
        return Err(Error::new(
            ErrorKind::Domain,
            "segment_slp_grad_power",
            "beta must be at least 1/2 for the Neumann family",
        ));
    }
    let d = segment_dlp_power(q)?;
    Ok(SeriesValue { value: -d.value / q.t, terms: d.terms, tail_bound: d.tail_bound / q.t })
}

/// Outcome of a numerical check of the jump relations at a boundary point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JumpReport {
    pub density: f64,
    pub pv_d: f64,
    pub pv_dadj: f64,
    /// Limits of D from the side the normal points to (+) and the other (−).
    pub d_plus: f64,
    pub d_minus: f64,
    pub dadj_plus: f64,
    pub dadj_minus: f64,
    /// d_plus − d_minus; equals +ρ(x0).
    pub jump_d: f64,
    /// dadj_plus − dadj_minus; equals −ρ(x0).
    pub jump_dadj: f64,
    /// Largest deviation of the four limits from p.v. ± ρ/2.
    pub defect: f64,
}

fn richardson(values: &[f64]) -> f64 {
    // Neville extrapolation to h = 0 for h_k = h0 2^{-k}.
    let mut t: Vec<f64> = values.to_vec();
    let n = t.len();
    for j in 1..n {
        let f = (1u64 << j) as f64;
        for i in (j..n).rev() {
            t[i] = (f * t[i] - t[i - 1]) / (f - 1.0);
        }
    }
    t[n - 1]
}

/// Evaluate D or D* of the panel-interpolated density at `y` by adaptive
/// product integration, skipping panels collinear with `y`.
fn near_layer(
    panels: &[SourcePanel],
    density: &[Vec<f64>],
    rule: &GaussLegendre,
    integrator: &GaussLegendre,
    y: Vec2,
    ny: Vec2,
    kind: LayerKind,
) -> Result<f64> {
    let mut acc = 0.0;
    for (p, dens) in panels.iter().zip(density) {
        let off = (y - p.a).dot(&p.normal);
        if off.abs() < 1e-14 * p.length() {
            continue;
        }
        let w = lagrange_product_weights(p.a, p.b, rule, y, ny, kind, integrator, 1e-15)?;
        acc += w.iter().zip(dens).map(|(w, s)| w * s).sum::<f64>();
    }
    Ok(acc)
}

/// Check the limiting values of D and n·∇S at the point of panel `panel`
/// with local coordinate `u` in (−1, 1), approaching along the normal.
pub fn jump_relation_check(
    panels: &[SourcePanel],
    density: &[Vec<f64>],
    panel: usize,
    u: f64,
) -> Result<JumpReport> {
    let q = panels[panel].points.len();
    let rule = GaussLegendre::new(q);
    let integrator = GaussLegendre::new(20);
    let p = &panels[panel];
    let x0 = (p.a + p.b) * 0.5 + (p.b - p.a) * (0.5 * u);
    let n = p.normal;
    let mut basis = vec![0.0; q];
    rule.lagrange(u, &mut basis);
    let rho: f64 = basis.iter().zip(&density[panel]).map(|(l, s)| l * s).sum();
    let pv_d = near_layer(panels, density, &rule, &integrator, x0, n, LayerKind::D)?;
    let pv_dadj = near_layer(panels, density, &rule, &integrator, x0, n, LayerKind::DAdj)?;
    let h0 = 0.05 * p.length() * (1.0 - u.abs());
    let levels = 6;
    let side = |sign: f64, kind: LayerKind| -> Result<f64> {
        let mut v = Vec::with_capacity(levels);
        for k in 0..levels {
            let h = h0 / (1u64 << k) as f64;
            v.push(near_layer(panels, density, &rule, &integrator, x0 + n * (sign * h), n, kind)?);
        }
        Ok(richardson(&v))
    };
    let d_plus = side(1.0, LayerKind::D)?;
    let d_minus = side(-1.0, LayerKind::D)?;
    let dadj_plus = side(1.0, LayerKind::DAdj)?;
    let dadj_minus = side(-1.0, LayerKind::DAdj)?;
    let defect = [
        d_plus - (pv_d + 0.5 * rho),
        d_minus - (pv_d - 0.5 * rho),
        dadj_plus - (pv_dadj - 0.5 * rho),
        dadj_minus - (pv_dadj + 0.5 * rho),
    ]
    .iter()
    .fold(0.0f64, |m, d| m.max(d.abs()));
    Ok(JumpReport {
        density: rho,
        pv_d,
        pv_dadj,
        d_plus,
        d_minus,
        dadj_plus,
        dadj_minus,
        jump_d: d_plus - d_minus,
        jump_dadj: dadj_plus - dadj_minus,
        defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::TWO_PI;
    use crate::oracle::graded_integral;
    use proptest::prelude::*;

    fn dlp_oracle(beta: f64, theta0: f64, t: f64) -> f64 {
        let (c, s) = (theta0.cos(), theta0.sin());
        graded_integral(|x| t * s * x.powf(beta) / (x * x - 2.0 * x * t * c + t * t) / (2.0 * PI), t)
    }

    fn slp_grad_oracle(beta: f64, theta0: f64, t: f64) -> f64 {
        // n(y)·∇_y of −log|x−y|/(2π) with x = (s,0), y = t e(θ0), n(y) = e(θ0)⊥.
        let y = Vec2::new(t * theta0.cos(), t * theta0.sin());
        let ny = Vec2::new(-theta0.sin(), theta0.cos());
        graded_integral(
            |s| {
                let r = y - Vec2::new(s, 0.0);
                -ny.dot(&r) / (2.0 * PI * r.norm_squared()) * s.powf(beta - 1.0)
            },
            t,
        )
    }

    #[test]
    fn kernel_trivial_values() {
        let p = KernelPoint {
            source: Vec2::zeros(),
            target: Vec2::new(0.0, 1.0),
            source_normal: Vec2::new(0.0, 1.0),
            target_normal: Vec2::new(1.0, 0.0),
        };
        assert!((kernel_k(&p).unwrap() - 1.0 / (2.0 * PI)).abs() < 1e-16);
        let q = KernelPoint { target: Vec2::new(3.0, 0.0), ..p };
        assert_eq!(kernel_k(&q).unwrap(), 0.0);
        let r = KernelPoint { target: Vec2::zeros(), ..p };
        assert_eq!(kernel_k(&r).unwrap_err().kind, ErrorKind::Domain);
    }

    proptest! {
        #[test]
        fn kernel_matches_independent_formula(
            x in proptest::array::uniform2(-3.0f64..3.0),
            y in proptest::array::uniform2(-3.0f64..3.0),
            ang in 0.0f64..TWO_PI,
        ) {
            let (sx, sy) = (x[0], x[1]);
            let (tx, ty) = (y[0], y[1]);
            let d2 = (tx - sx).powi(2) + (ty - sy).powi(2);
            prop_assume!(d2 > 1e-6);
            let expect = (ang.cos() * (tx - sx) + ang.sin() * (ty - sy)) / d2 / (2.0 * PI);
            let p = KernelPoint {
                source: Vec2::new(sx, sy),
                target: Vec2::new(tx, ty),
                source_normal: Vec2::new(ang.cos(), ang.sin()),
                target_normal: Vec2::new(1.0, 0.0),
            };
            let k = kernel_k(&p).unwrap();
            prop_assert!((k - expect).abs() <= 1e-15 * (1.0 + expect.abs()));
        }

        #[test]
        fn adjoint_is_kernel_with_roles_swapped(
            x in proptest::array::uniform2(-3.0f64..3.0),
            y in proptest::array::uniform2(-3.0f64..3.0),
            a in 0.0f64..TWO_PI, b in 0.0f64..TWO_PI,
        ) {
            let (xs, ys) = (Vec2::new(x[0], x[1]), Vec2::new(y[0], y[1]));
            prop_assume!((xs - ys).norm() > 1e-3);
            let (nx, ny) = (Vec2::new(a.cos(), a.sin()), Vec2::new(b.cos(), b.sin()));
            let adj = layer_kernel(LayerKind::DAdj, xs, nx, ys, ny);
            let swapped = layer_kernel(LayerKind::D, ys, ny, xs, nx);
            prop_assert!((adj - swapped).abs() <= 1e-14 * (1.0 + adj.abs()));
        }

        #[test]
        fn dlp_series_matches_oracle(beta in 0.0f64..50.0, theta0 in 0.1f64..6.18, t in 0.01f64..0.9) {
            let q = SegmentPowerQuery { beta, theta0, t, tol: 1e-15 };
            let v = segment_dlp_power(&q).unwrap().value;
            let o = dlp_oracle(beta, theta0, t);
            prop_assert!((v - o).abs() <= 1e-13, "beta={beta} theta0={theta0} t={t} v={v} o={o}");
        }

        #[test]
        fn more_terms_change_less_than_tail_bound(beta in 0.0f64..20.0, theta0 in 0.1f64..6.18, t in 0.05f64..0.9) {
            let coarse = segment_dlp_power(&SegmentPowerQuery { beta, theta0, t, tol: 1e-6 }).unwrap();
            let fine = segment_dlp_power(&SegmentPowerQuery { beta, theta0, t, tol: 1e-16 }).unwrap();
            prop_assert!((coarse.value - fine.value).abs() <= coarse.tail_bound + 1e-15);
        }
    }

    #[test]
    fn collinear_target_gives_zero() {
        for beta in [0.0, 0.5, 0.75, 3.0, 17.2] {
            let q = SegmentPowerQuery { beta, theta0: PI, t: 0.4, tol: 1e-15 };
            assert_eq!(segment_dlp_power(&q).unwrap().value, 0.0);
            if beta >= 0.5 {
                assert_eq!(segment_slp_grad_power(&q).unwrap().value, 0.0);
            }
        }
    }

    #[test]
    fn beta_zero_small_t_limit_is_subtended_angle() {
        let theta0 = 1.3;
        let q = SegmentPowerQuery { beta: 0.0, theta0, t: 1e-10, tol: 1e-15 };
        let v = segment_dlp_power(&q).unwrap().value;
        assert!((v - (PI - theta0) / (2.0 * PI)).abs() < 1e-9);
    }

    #[test]
    fn dlp_fixed_point_matches_oracle() {
        let q = SegmentPowerQuery { beta: 0.75, theta0: 1.1, t: 0.3, tol: 1e-15 };
        let v = segment_dlp_power(&q).unwrap().value;
        assert!((v - dlp_oracle(0.75, 1.1, 0.3)).abs() < 1e-12);
    }

    #[test]
    fn slp_grad_fixed_point_matches_oracle() {
        let q = SegmentPowerQuery { beta: 0.8, theta0: 0.9, t: 0.25, tol: 1e-15 };
        let v = segment_slp_grad_power(&q).unwrap().value;
        assert!((v - slp_grad_oracle(0.8, 0.9, 0.25)).abs() < 1e-11);
        for (beta, theta0, t) in [(3.0, 2.0, 0.5), (1.0, 4.0, 0.1), (7.3, 5.5, 0.7)] {
            let q = SegmentPowerQuery { beta, theta0, t, tol: 1e-15 };
            let v = segment_slp_grad_power(&q).unwrap().value;
            assert!((v - slp_grad_oracle(beta, theta0, t)).abs() < 1e-10);
        }
    }

    #[test]
    fn slp_grad_is_negated_reindexed_dlp() {
        let mut seed = 7u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..10 {
            let q = SegmentPowerQuery { beta: 0.5 + 20.0 * next(), theta0: 0.1 + 6.0 * next(), t: 0.05 + 0.8 * next(), tol: 1e-15 };
            let d = segment_dlp_power(&q).unwrap().value;
            let g = segment_slp_grad_power(&q).unwrap().value;
            assert!((g + d / q.t).abs() <= 1e-15 * (1.0 + g.abs()));
        }
    }

    #[test]
    fn integer_branch_continuity() {
        for m in [1.0, 2.0, 5.0, 13.0] {
            for (theta0, t) in [(0.7, 0.3), (2.5, 0.6), (4.0, 0.05)] {
                let at = |beta: f64| segment_dlp_power(&SegmentPowerQuery { beta, theta0, t, tol: 1e-15 }).unwrap().value;
                let exact = at(m);
                for e in [1e-7, -1e-7, 1e-4, -3e-3] {
                    assert!((at(m + e) - exact).abs() < 1e-5 * (1.0 + 10.0 * e.abs() / 1e-7));
                }
                assert!((at(m + 1e-7) - exact).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn near_integer_matches_oracle() {
        for beta in [1.0 + 1e-6, 2.0 - 3e-8, 4.0 + 0.05, 3.0 - 1e-3] {
            let q = SegmentPowerQuery { beta, theta0: 2.2, t: 0.4, tol: 1e-15 };
            let v = segment_dlp_power(&q).unwrap().value;
            assert!((v - dlp_oracle(beta, 2.2, 0.4)).abs() < 1e-13, "beta={beta}");
        }
    }

    #[test]
    fn domain_errors() {
        let q = SegmentPowerQuery { beta: 1.5, theta0: 1.0, t: 1.0, tol: 1e-12 };
        assert_eq!(segment_dlp_power(&q).unwrap_err().kind, ErrorKind::Domain);
        let q = SegmentPowerQuery { t: 0.97, tol: 1e-15, ..q };
        assert!(segment_dlp_power(&q).is_err());
        let q = SegmentPowerQuery { beta: 0.3, t: 0.5, tol: 1e-12, theta0: 1.0 };
        assert!(segment_slp_grad_power(&q).is_err());
    }

    fn unit_square() -> Vec<Vec2> {
        vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(1.0, 1.0), Vec2::new(0.0, 1.0)]
    }

    #[test]
    fn gauss_identity_with_outward_normal() {
        // Counterclockwise traversal puts the region on the left, so the
        // perp normal points outward.
        let sq = unit_square();
        let panels = panelize_polygon(&sq, 1, 16);
        let ones: Vec<Vec<f64>> = panels.iter().map(|p| vec![1.0; p.points.len()]).collect();
        let inside = eval_layer(&panels, &ones, Vec2::new(0.5, 0.5), Vec2::new(1.0, 0.0), LayerKind::D);
        // The centre is within 3 panel lengths; use finer panels.
        assert_eq!(inside.unwrap_err().kind, ErrorKind::TooClose);
        let panels = panelize_polygon(&sq, 8, 16);
        let ones: Vec<Vec<f64>> = panels.iter().map(|p| vec![1.0; p.points.len()]).collect();
        let v = eval_layer(&panels, &ones, Vec2::new(0.5, 0.5), Vec2::new(1.0, 0.0), LayerKind::D).unwrap();
        assert!((v + 1.0).abs() < 1e-13, "{v}");
        let out = eval_layer(&panels, &ones, Vec2::new(5.0, -3.0), Vec2::new(1.0, 0.0), LayerKind::D).unwrap();
        assert!(out.abs() < 1e-14);
        // Oracle: integrate the kernel of each side adaptively.
        let rule = GaussLegendre::new(16);
        let integ = GaussLegendre::new(20);
        let y = Vec2::new(0.3, 0.6);
        let mut total = 0.0;
        for i in 0..4 {
            let (a, b) = (sq[i], sq[(i + 1) % 4]);
            let w = lagrange_product_weights(a, b, &rule, y, Vec2::zeros(), LayerKind::D, &integ, 1e-15).unwrap();
            total += w.iter().sum::<f64>();
        }
        assert!((total + 1.0).abs() < 1e-14);
    }

    #[test]
    fn single_layer_far_matches_oracle() {
        let panels = panelize_segment(Vec2::zeros(), Vec2::new(1.0, 0.0), 2, 16);
        let ones: Vec<Vec<f64>> = panels.iter().map(|p| vec![1.0; p.points.len()]).collect();
        let y = Vec2::new(10.0, 10.0);
        let v = eval_layer(&panels, &ones, y, Vec2::zeros(), LayerKind::S).unwrap();
        let o = graded_integral(|s| -((y - Vec2::new(s, 0.0)).norm().ln()) / (2.0 * PI), 0.5);
        assert!((v - o).abs() < 1e-12);
    }

    #[test]
    fn jump_of_constant_density() {
        let panels = panelize_segment(Vec2::new(-5.0, 0.0), Vec2::new(5.0, 0.0), 10, 16);
        let ones: Vec<Vec<f64>> = panels.iter().map(|p| vec![1.0; p.points.len()]).collect();
        let r = jump_relation_check(&panels, &ones, 5, -0.3).unwrap();
        assert!((r.jump_d - 1.0).abs() < 1e-10, "{r:?}");
        assert!((r.jump_dadj + 1.0).abs() < 1e-10);
        assert!(r.jump_d * r.jump_dadj < 0.0);
        assert!(r.defect < 1e-10);
    }

    #[test]
    fn jump_of_smooth_density() {
        let panels = panelize_segment(Vec2::zeros(), Vec2::new(1.0, 0.0), 4, 16);
        let dens: Vec<Vec<f64>> = panels.iter().map(|p| p.points.iter().map(|x| x.x * (1.0 - x.x)).collect()).collect();
        // x0 = 0.5 lies on a panel boundary; take the interior point 0.45.
        let u = (0.45 - 0.375) / 0.125;
        let r = jump_relation_check(&panels, &dens, 1, u).unwrap();
        assert!((r.density - 0.45 * 0.55).abs() < 1e-14);
        assert!(r.defect <= 1e-8, "{r:?}");
    }
}
