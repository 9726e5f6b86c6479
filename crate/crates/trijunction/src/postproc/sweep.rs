//! Condition-number sweeps over the material plane (a, b) and over the
//! junction angles. Each point is independent; the drivers here run them
//! serially and callers with threads can map the point functions directly.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;
use nalgebra::DMatrix;

use crate::cornerbasis::CornerRule;
use crate::discretize::{assemble_kdir, build_panels, check_angles, NystromSystem, ANGLE_GUARD};
use crate::error::Result;
use crate::geometry::CompositeMesh;
use crate::postproc::templates::{junction_template, two_triangle, AngleRegion};
use crate::solve::condition_number;

/// Media (μ, ν) of regions 1..3 for material point (a, b) = (d_(3,1), d_(2,3))
/// with μ and ν3 held fixed:
/// ν1 = ν3 μ1/μ3 · (1+a)/(1−a), ν2 = ν3 μ2/μ3 · (1−b)/(1+b).
pub fn ab_media(a: f64, b: f64, mu: [f64; 3], nu3: f64) -> [(f64, f64); 3] {
    let nu1 = nu3 * mu[0] / mu[2] * (1.0 + a) / (1.0 - a);
    let nu2 = nu3 * mu[1] / mu[2] * (1.0 - b) / (1.0 + b);
    [(mu[0], nu1), (mu[1], nu2), (mu[2], nu3)]
}

/// Fixed μ and ν3 of the material sweep.
pub const AB_MU: [f64; 3] = [0.37, 0.81, 1.0];
pub const AB_NU3: f64 = 0.77;

/// Two-triangle template for the material sweep: Ω1 the upper triangle,
/// Ω2 the lower one and Ω3 the surrounding medium.
pub fn ab_template(media: [(f64, f64); 3], panels: usize) -> Result<CompositeMesh> {
    two_triangle(media[2], [media[0], media[1]], panels)
}

/// −I/2 + Δ X̃ for new per-node material coefficients on a fixed coupling.
pub fn matrix_with_d(sys: &NystromSystem, d_node: &[f64]) -> DMatrix<f64> {
    let n = sys.n();
    let mut m = DMatrix::from_fn(n, n, |r, c| d_node[r] * sys.coupling[(r, c)]);
    for i in 0..n {
        m[(i, i)] -= 0.5;
    }
    m
}

/// Per-node coefficients of `mesh` on the nodes of `sys`.
pub fn node_d(mesh: &CompositeMesh, sys: &NystromSystem) -> Vec<f64> {
    (0..sys.n()).map(|p| mesh.edge_d(sys.edge_of(p))).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct AbPoint {
    pub a: f64,
    pub b: f64,
    /// None when the point could not be evaluated; see `note`.
    pub cond: Option<f64>,
    pub note: Option<String>,
}

/// Cell-centered grid of `n` points on (−1, 1): −1 + (2i + 1)/n.
pub fn ab_axis(n: usize) -> Vec<f64> {
    (0..n).map(|i| -1.0 + (2 * i + 1) as f64 / n as f64).collect()
}

/// Condition number at one material point, reusing the coupling of a
/// template system assembled on the same geometry.
pub fn ab_point(base: &NystromSystem, a: f64, b: f64, mu: [f64; 3], nu3: f64, panels: usize) -> AbPoint {
    let run = || -> Result<f64> {
        let mesh = ab_template(ab_media(a, b, mu, nu3), panels)?;
        let d = node_d(&mesh, base);
        condition_number(&matrix_with_d(base, &d))
    };
    match run() {
        Ok(c) if c.is_finite() => AbPoint { a, b, cond: Some(c), note: None },
        Ok(c) => AbPoint { a, b, cond: None, note: Some(format!("condition number {c}")) },
        Err(e) => AbPoint { a, b, cond: None, note: Some(format!("{e}")) },
    }
}

/// Assemble the material-sweep template once (its coupling does not depend
/// on the media).
pub fn ab_base(rule: &CornerRule, panels: usize, order: usize) -> Result<NystromSystem> {
    let mesh = ab_template(ab_media(0.0, 0.0, AB_MU, AB_NU3), panels)?;
    let p = build_panels(&mesh, rule, order, None)?;
    assemble_kdir(&mesh, p, rule)
}

/// Row-major (a outer, b inner) sweep over the n×n cell-centered grid.
pub fn sweep_ab(rule: &CornerRule, n: usize, panels: usize, order: usize) -> Result<Vec<AbPoint>> {
    let base = ab_base(rule, panels, order)?;
    let axis = ab_axis(n);
    let mut out = Vec::with_capacity(n * n);
    for &a in &axis {
        for &b in &axis {
            out.push(ab_point(&base, a, b, AB_MU, AB_NU3, panels));
        }
    }
    Ok(out)
}

/// Media of the angle sweep (Ω1, Ω2, Ω3); Ω3 matches the unit exterior so
/// the region I and IV templates carry the same contrasts at the junction.
pub const ANGLE_MEDIA: [(f64, f64); 3] = [(1.0, 1.5), (1.0, 0.7), (1.0, 1.0)];

#[derive(Clone, Debug, PartialEq)]
pub struct AnglePoint {
    pub theta1: f64,
    pub theta2: f64,
    pub region: AngleRegion,
    pub cond: Option<f64>,
    /// Reason the point was skipped.
    pub flag: Option<String>,
}

/// Whether all three junction angles clear the guard.
pub fn angles_admissible(theta1: f64, theta2: f64) -> bool {
    let theta3 = 2.0 * PI - theta1 - theta2;
    [theta1, theta2, theta3].iter().all(|&t| t > ANGLE_GUARD && t < 2.0 * PI - ANGLE_GUARD)
}

pub fn angle_point(rule: &CornerRule, theta1: f64, theta2: f64, media: [(f64, f64); 3], panels: usize, order: usize) -> AnglePoint {
    let region = AngleRegion::classify(theta1, theta2);
    if !angles_admissible(theta1, theta2) {
        return AnglePoint { theta1, theta2, region, cond: None, flag: Some("angle guard".into()) };
    }
    let run = || -> Result<f64> {
        let mesh = junction_template(theta1, theta2, media, panels)?;
        check_angles(&mesh)?;
        let p = build_panels(&mesh, rule, order, None)?;
        let sys = assemble_kdir(&mesh, p, rule)?;
        condition_number(&sys.matrix)
    };
    match run() {
        Ok(c) => AnglePoint { theta1, theta2, region, cond: Some(c), flag: None },
        Err(e) => AnglePoint { theta1, theta2, region, cond: None, flag: Some(format!("{e}")) },
    }
}

/// Grid over (0, π)² with cell-centered angles θ = π(i + ½)/n.
pub fn angle_axis(n: usize) -> Vec<f64> {
    (0..n).map(|i| PI * (i as f64 + 0.5) / n as f64).collect()
}

pub fn sweep_angles(rule: &CornerRule, n: usize, media: [(f64, f64); 3], panels: usize, order: usize) -> Vec<AnglePoint> {
    let axis = angle_axis(n);
    let mut out = Vec::with_capacity(n * n);
    for &t1 in &axis {
        for &t2 in &axis {
            out.push(angle_point(rule, t1, t2, media, panels, order));
        }
    }
    out
}
