//! Bundled geometries: two triangles sharing an edge, a four-cell diamond,
//! single-junction templates for angle sweeps and perturbed hexagonal
//! lattices.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, ErrorKind, Result};
use crate::geometry::{CompositeMesh, EdgeInput, Region, Vec2};

fn edge(v_start: usize, v_end: usize, left: usize, right: usize, panels: usize) -> EdgeInput {
    EdgeInput { v_start, v_end, left, right, panels }
}

fn regions(exterior: (f64, f64), media: &[(f64, f64)]) -> Vec<Region> {
    let mut out = vec![Region { id: 0, mu: exterior.0, nu: exterior.1 }];
    out.extend(media.iter().enumerate().map(|(i, &(mu, nu))| Region { id: i + 1, mu, nu }));
    out
}

/// Default media (μ, ν) of the two-triangle geometry.
pub const TWO_TRIANGLE_MEDIA: [(f64, f64); 2] = [(2.0, 0.5), (0.6, 1.7)];

/// Triangle ABC over triangle ADB, sharing AB; 7 vertices, 8 edges, triple
/// junctions at A and B. Region 1 is the upper triangle, region 2 the lower.
pub fn two_triangle(exterior: (f64, f64), media: [(f64, f64); 2], panels: usize) -> Result<CompositeMesh> {
    let a = Vec2::new(0.0, 0.0);
    let b = Vec2::new(1.0, 0.0);
    let c = Vec2::new(0.5, 1.0);
    let d = Vec2::new(0.5, -0.9);
    let verts = vec![a, b, (a + b) / 2.0, c, d, (a + c) / 2.0, (b + d) / 2.0];
    // 0 A, 1 B, 2 M, 3 C, 4 D, 5 P (mid AC), 6 Q (mid BD)
    let edges = [
        edge(0, 2, 1, 2, panels),
        edge(2, 1, 1, 2, panels),
        edge(1, 3, 1, 0, panels),
        edge(3, 5, 1, 0, panels),
        edge(5, 0, 1, 0, panels),
        edge(0, 4, 2, 0, panels),
        edge(4, 6, 2, 0, panels),
        edge(6, 1, 2, 0, panels),
    ];
    CompositeMesh::new(verts, regions(exterior, &media), &edges)
}

/// Default media of the diamond geometry.
pub const DIAMOND_MEDIA: [(f64, f64); 4] = [(1.3, 0.6), (0.5, 2.0), (2.2, 1.1), (0.8, 0.35)];

/// Unit diamond cut by a horizontal line and two offset vertical segments
/// into four cells; every vertex has at most three edges.
pub fn diamond(exterior: (f64, f64), media: [(f64, f64); 4], panels: usize) -> Result<CompositeMesh> {
    let n = Vec2::new(0.0, 1.0);
    let e = Vec2::new(1.0, 0.0);
    let s = Vec2::new(0.0, -1.0);
    let w = Vec2::new(-1.0, 0.0);
    let t1 = Vec2::new(0.2, 0.0);
    let t2 = Vec2::new(-0.2, 0.0);
    let verts = vec![n, e, s, w, t1, t2, (n + e) / 2.0, (e + s) / 2.0, (s + w) / 2.0, (w + n) / 2.0];
    // Regions: 1 upper left, 2 upper right, 3 lower right, 4 lower left.
    let edges = [
        edge(1, 6, 2, 0, panels),
        edge(6, 0, 2, 0, panels),
        edge(0, 9, 1, 0, panels),
        edge(9, 3, 1, 0, panels),
        edge(3, 8, 4, 0, panels),
        edge(8, 2, 4, 0, panels),
        edge(2, 7, 3, 0, panels),
        edge(7, 1, 3, 0, panels),
        edge(3, 5, 1, 4, panels),
        edge(5, 4, 1, 3, panels),
        edge(4, 1, 2, 3, panels),
        edge(4, 0, 1, 2, panels),
        edge(5, 2, 3, 4, panels),
    ];
    CompositeMesh::new(verts, regions(exterior, &media), &edges)
}

/// Which single-junction template a point of the angle simplex uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AngleRegion {
    /// All three sectors below π: three bounded sectors.
    I,
    /// θ3 ≥ π: two bounded sectors, the third medium is the exterior.
    IV,
}

impl AngleRegion {
    pub fn classify(theta1: f64, theta2: f64) -> Self {
        if theta1 + theta2 <= PI {
            AngleRegion::IV
        } else {
            AngleRegion::I
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AngleRegion::I => "I",
            AngleRegion::IV => "IV",
        }
    }
}

/// Arc vertices strictly inside the sector [a0, a1] on the unit circle.
fn arc(a0: f64, a1: f64) -> Vec<Vec2> {
    let m = ((a1 - a0) / (PI / 3.0)).ceil().max(1.0) as usize;
    (1..m)
        .map(|k| {
            let a = a0 + (a1 - a0) * k as f64 / m as f64;
            Vec2::new(a.cos(), a.sin())
        })
        .collect()
}

/// Junction at the origin with spokes of unit length at angles 0, θ1 and
/// θ1+θ2; sectors are closed by polygonal arcs on the unit circle.
/// `media[k]` is (μ, ν) of Ω_{k+1}. In region IV the third medium is the
/// exterior itself, so only the first two sectors are closed.
pub fn junction_template(theta1: f64, theta2: f64, media: [(f64, f64); 3], panels: usize) -> Result<CompositeMesh> {
    let kind = AngleRegion::classify(theta1, theta2);
    let dirs = [0.0, theta1, theta1 + theta2];
    let mut verts = vec![Vec2::zeros()];
    for a in dirs {
        verts.push(Vec2::new(a.cos(), a.sin()));
    }
    // Spoke k runs from the origin to vertex k+1. Γ(3,1) is spoke 0 with Ω1
    // on its counterclockwise (left) side, Γ(1,2) spoke 1, Γ(2,3) spoke 2.
    let (reg, ext) = match kind {
        AngleRegion::I => (regions((1.0, 1.0), &media), [1, 2, 3]),
        AngleRegion::IV => (regions(media[2], &media[..2]), [1, 2, 0]),
    };
    let mut edges = vec![
        edge(0, 1, ext[0], ext[2], panels),
        edge(0, 2, ext[1], ext[0], panels),
        edge(0, 3, ext[2], ext[1], panels),
    ];
    let sectors = [(0usize, dirs[0], dirs[1]), (1, dirs[1], dirs[2]), (2, dirs[2], 2.0 * PI)];
    for &(k, a0, a1) in &sectors {
        let id = ext[k];
        if id == 0 {
            continue;
        }
        let start = k + 1;
        let end = if k == 2 { 1 } else { k + 2 };
        let mut chain = vec![start];
        for p in arc(a0, a1) {
            verts.push(p);
            chain.push(verts.len() - 1);
        }
        chain.push(end);
        for w in chain.windows(2) {
            edges.push(edge(w[0], w[1], id, 0, panels));
        }
    }
    CompositeMesh::new(verts, reg, &edges)
}

/// A lattice together with the perturbation actually applied.
#[derive(Clone, Debug, PartialEq)]
pub struct Lattice {
    pub mesh: CompositeMesh,
    pub perturbation: f64,
    pub attempts: usize,
    /// Permittivity of each cell, indexed by region id − 1.
    pub epsilon: Vec<f64>,
}

/// Axial coordinates of the hexagons within `rings` of the center.
fn hex_cells(rings: i32) -> Vec<(i32, i32)> {
    let mut out = Vec::new();
    for q in -rings..=rings {
        for r in -rings..=rings {
            if (q + r).abs() <= rings {
                out.push((q, r));
            }
        }
    }
    out
}

fn key(p: Vec2) -> (i64, i64) {
    ((p.x * 1e9).round() as i64, (p.y * 1e9).round() as i64)
}

fn segments_cross(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    let cross = |o: Vec2, p: Vec2, q: Vec2| (p.x - o.x) * (q.y - o.y) - (p.y - o.y) * (q.x - o.x);
    let d1 = cross(c, d, a);
    let d2 = cross(c, d, b);
    let d3 = cross(a, b, c);
    let d4 = cross(a, b, d);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

/// Centered hexagonal patch `cells_across` cells wide (odd: 1, 7, 19, 37
/// cells for 1, 3, 5, 7), scaled into the unit square. Vertices move by
/// `perturbation` side lengths in a random direction; ε = 10^c with c
/// uniform in `exponent_range`. μ = 1 and ν = ε in every cell, with the
/// exterior at ε = 1. Deterministic in `seed`.
pub fn hex_lattice(cells_across: usize, perturbation: f64, exponent_range: (f64, f64), seed: u64, panels: usize) -> Result<Lattice> {
    if cells_across % 2 == 0 || cells_across == 0 {
        return Err(Error::new(ErrorKind::Validation, "hex_lattice", format!("cells_across must be odd, got {cells_across}")));
    }
    if !(0.0..=0.3).contains(&perturbation) {
        return Err(Error::new(
            ErrorKind::Validation,
            "hex_lattice",
            format!("perturbation {perturbation} must lie in [0, 0.3]"),
        ));
    }
    if !(exponent_range.0 <= exponent_range.1) {
        return Err(Error::new(ErrorKind::Validation, "hex_lattice", "empty exponent range"));
    }
    let rings = (cells_across / 2) as i32;
    let cells = hex_cells(rings);
    // Pointy-top hexagons of unit side, centers in axial coordinates.
    let s3 = 3f64.sqrt();
    let mut verts: Vec<Vec2> = Vec::new();
    let mut index: Vec<((i64, i64), usize)> = Vec::new();
    let mut cell_loops: Vec<[usize; 6]> = Vec::new();
    for &(q, r) in &cells {
        let c = Vec2::new(s3 * (q as f64 + r as f64 / 2.0), 1.5 * r as f64);
        let mut lp = [0usize; 6];
        for (k, slot) in lp.iter_mut().enumerate() {
            let a = PI / 6.0 + PI / 3.0 * k as f64;
            let p = c + Vec2::new(a.cos(), a.sin());
            let kp = key(p);
            *slot = match index.iter().find(|(k2, _)| *k2 == kp) {
                Some(&(_, i)) => i,
                None => {
                    verts.push(p);
                    index.push((kp, verts.len() - 1));
                    verts.len() - 1
                }
            };
        }
        cell_loops.push(lp);
    }
    // Edges: each cell boundary counterclockwise, merged with the neighbor.
    let mut edges: Vec<EdgeInput> = Vec::new();
    for (ci, lp) in cell_loops.iter().enumerate() {
        for k in 0..6 {
            let (a, b) = (lp[k], lp[(k + 1) % 6]);
            if let Some(e) = edges.iter_mut().find(|e| e.v_start == b && e.v_end == a) {
                e.right = ci + 1;
            } else {
                edges.push(edge(a, b, ci + 1, 0, panels));
            }
        }
    }
    // Fit into the unit square.
    let (mut lo, mut hi) = (Vec2::new(f64::INFINITY, f64::INFINITY), Vec2::new(-f64::INFINITY, -f64::INFINITY));
    for p in &verts {
        lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let margin = 1.0 + 2.0 * perturbation;
    let scale = 1.0 / ((hi.x - lo.x).max(hi.y - lo.y) + 2.0 * margin);
    let center = (lo + hi) / 2.0;
    let base: Vec<Vec2> = verts.iter().map(|p| (p - center) * scale + Vec2::new(0.5, 0.5)).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let epsilon: Vec<f64> = (0..cells.len()).map(|_| 10f64.powf(rng.gen_range(exponent_range.0..=exponent_range.1))).collect();
    let directions: Vec<f64> = (0..base.len()).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
    let mut media = vec![Region { id: 0, mu: 1.0, nu: 1.0 }];
    media.extend(epsilon.iter().enumerate().map(|(i, &e)| Region { id: i + 1, mu: 1.0, nu: e }));

    let mut amount = perturbation;
    for attempt in 1..=8 {
        let moved: Vec<Vec2> = base
            .iter()
            .zip(&directions)
            .map(|(p, a)| p + Vec2::new(a.cos(), a.sin()) * (amount * scale))
            .collect();
        let crossing = edges.iter().enumerate().any(|(i, e)| {
            edges[i + 1..].iter().any(|f| {
                let shared = e.v_start == f.v_start || e.v_start == f.v_end || e.v_end == f.v_start || e.v_end == f.v_end;
                !shared && segments_cross(moved[e.v_start], moved[e.v_end], moved[f.v_start], moved[f.v_end])
            })
        });
        if !crossing {
            if let Ok(mesh) = CompositeMesh::new(moved, media.clone(), &edges) {
                if mesh.interior_regions().iter().all(|&id| mesh.region_area(id) > 0.0) {
                    return Ok(Lattice { mesh, perturbation: amount, attempts: attempt, epsilon });
                }
            }
        }
        amount *= 0.5;
    }
    Err(Error::new(
        ErrorKind::Validation,
        "hex_lattice",
        format!("perturbed lattice self-intersects even at perturbation {amount:.3e}"),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::check_angles;

    #[test]
    fn two_triangle_shape() {
        let m = two_triangle((1.0, 1.0), TWO_TRIANGLE_MEDIA, 3).unwrap();
        assert_eq!((m.vertices.len(), m.edges.len(), m.junctions.len()), (7, 8, 2));
        assert!(m.region_area(1) > 0.0 && m.region_area(2) > 0.0);
        check_angles(&m).unwrap();
        assert_eq!(m.locate(Vec2::new(0.5, 0.3)), 1);
        assert_eq!(m.locate(Vec2::new(0.5, -0.3)), 2);
    }

    #[test]
    fn diamond_shape() {
        let m = diamond((1.0, 1.0), DIAMOND_MEDIA, 3).unwrap();
        assert_eq!(m.junctions.len(), 6);
        for id in 1..=4 {
            assert!(m.region_area(id) > 0.0, "region {id}");
        }
        let total: f64 = (1..=4).map(|id| m.region_area(id)).sum();
        assert!((total - 2.0).abs() < 1e-14);
        check_angles(&m).unwrap();
    }

    #[test]
    fn junction_templates() {
        let media = [(1.0, 2.0), (0.5, 0.7), (1.5, 1.0)];
        for (t1, t2) in [(2.0, 2.5), (1.0, 1.2), (2.0 * PI / 3.0, 2.0 * PI / 3.0)] {
            let m = junction_template(t1, t2, media, 3).unwrap();
            let j = m.junctions.iter().find(|j| j.vertex == 0).unwrap();
            assert!((j.angles[0] - t1).abs() < 1e-14 && (j.angles[1] - t2).abs() < 1e-14);
            let r = [m.region(j.regions[0]), m.region(j.regions[1]), m.region(j.regions[2])];
            for k in 0..3 {
                assert_eq!((r[k].mu, r[k].nu), media[k]);
            }
            check_angles(&m).unwrap();
        }
    }

    #[test]
    fn regular_lattice_angles() {
        let l = hex_lattice(3, 0.0, (-1.0, 1.0), 3, 3).unwrap();
        assert_eq!(l.mesh.interior_regions().len(), 7);
        assert_eq!(l.mesh.vertices.len(), 24);
        assert_eq!(l.mesh.edges.len(), 30);
        for j in &l.mesh.junctions {
            let interior = j.regions.iter().all(|&r| r != 0);
            if interior {
                for a in j.angles {
                    assert!((a - 2.0 * PI / 3.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn lattice_is_deterministic() {
        let a = hex_lattice(5, 0.1, (-1.0, 1.0), 42, 3).unwrap();
        let b = hex_lattice(5, 0.1, (-1.0, 1.0), 42, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.mesh.interior_regions().len(), 19);
        assert!(a.epsilon.iter().all(|&e| (0.1..=10.0).contains(&e)));
        let c = hex_lattice(5, 0.1, (-1.0, 1.0), 43, 3).unwrap();
        assert_ne!(a.mesh.vertices, c.mesh.vertices);
        let (lo, hi) = a.mesh.bounding_box();
        assert!(lo.x > 0.0 && lo.y > 0.0 && hi.x < 1.0 && hi.y < 1.0);
    }
}
