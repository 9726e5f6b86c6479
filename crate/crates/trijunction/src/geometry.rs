//! Polygonal composite media: regions, oriented edges, vertices and the
//! junctions where three media meet.
//!
//! Orientation: the normal of an edge is its direction `(x1, x2)` mapped to
//! `(x2, -x1)` and normalized, so it points into the right region.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_traits::Float;

use crate::error::{Error, ErrorKind, Result};

pub type Vec2 = nalgebra::Vector2<f64>;

pub const TWO_PI: f64 = 2.0 * PI;

/// Vertices closer than this are rejected as coincident.
pub const VERTEX_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Region {
    pub id: usize,
    pub mu: f64,
    pub nu: f64,
}

/// Edge as given by the user, before derived quantities are filled in.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeInput {
    pub v_start: usize,
    pub v_end: usize,
    pub left: usize,
    pub right: usize,
    pub panels: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeSpec {
    pub id: usize,
    pub v_start: usize,
    pub v_end: usize,
    pub left_region: usize,
    pub right_region: usize,
    pub length: f64,
    pub normal: Vec2,
    pub panels_per_edge: usize,
}

impl EdgeSpec {
    pub fn tangent(&self) -> Vec2 {
        Vec2::new(-self.normal.y, self.normal.x)
    }
}

/// Three edges meeting at a vertex.
///
/// Labels follow the counterclockwise order around the vertex: edge
/// Γ(3,1) leaves at angle φ, Γ(1,2) at φ+θ1 and Γ(2,3) at φ+θ1+θ2; region
/// Ω_k fills the sector of angle θ_k. `edges`, `outgoing` are stored in the
/// vector order [(1,2), (2,3), (3,1)].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Junction {
    pub vertex: usize,
    pub edges: [usize; 3],
    /// Whether each edge starts at the junction vertex.
    pub outgoing: [bool; 3],
    /// Regions (Ω1, Ω2, Ω3).
    pub regions: [usize; 3],
    pub angles: [f64; 3],
    /// (a, b, c) = (d_(3,1), d_(1,2), d_(2,3)).
    pub materials: [f64; 3],
}

/// A vertex where exactly two edges meet.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Corner {
    pub vertex: usize,
    pub edges: [usize; 2],
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompositeMesh {
    pub vertices: Vec<Vec2>,
    pub edges: Vec<EdgeSpec>,
    pub regions: Vec<Region>,
    pub junctions: Vec<Junction>,
    pub corners: Vec<Corner>,
}

/// Material contrast of the interface between media i and j:
/// d = (μ_i ν_j − μ_j ν_i) / (μ_i ν_j + μ_j ν_i).
pub fn material_d(ri: &Region, rj: &Region) -> f64 {
    (ri.mu * rj.nu - rj.mu * ri.nu) / (ri.mu * rj.nu + rj.mu * ri.nu)
}

/// Normal from the perp convention (x1, x2) -> (x2, -x1).
pub fn perp_normal(dir: Vec2) -> Vec2 {
    Vec2::new(dir.y, -dir.x) / dir.norm()
}

fn verr(detail: alloc::string::String) -> Error {
    Error::new(ErrorKind::Validation, "geometry", detail)
}

impl CompositeMesh {
    /// Validate the input and compute normals, lengths, junctions and corners.
    pub fn new(vertices: Vec<Vec2>, regions: Vec<Region>, edges: &[EdgeInput]) -> Result<Self> {
        for (i, r) in regions.iter().enumerate() {
            if !(r.mu > 0.0 && r.nu > 0.0 && r.mu.is_finite() && r.nu.is_finite()) {
                return Err(verr(format!("region {} needs positive finite mu, nu", r.id)));
            }
            if regions[..i].iter().any(|q| q.id == r.id) {
                return Err(verr(format!("duplicate region id {}", r.id)));
            }
        }
        if !regions.iter().any(|r| r.id == 0) {
            return Err(verr("exterior region 0 is missing".into()));
        }
        for (i, p) in vertices.iter().enumerate() {
            if !(p.x.is_finite() && p.y.is_finite()) {
                return Err(verr(format!("vertex {i} is not finite")));
            }
            for (j, q) in vertices[..i].iter().enumerate() {
                if (p - q).norm() < VERTEX_TOL {
                    return Err(verr(format!("vertices {j} and {i} coincide")));
                }
            }
        }
        let mut specs = Vec::with_capacity(edges.len());
        for (id, e) in edges.iter().enumerate() {
            if e.v_start >= vertices.len() || e.v_end >= vertices.len() {
                return Err(verr(format!("edge {id} references a missing vertex")));
            }
            for r in [e.left, e.right] {
                if !regions.iter().any(|q| q.id == r) {
                    return Err(verr(format!("edge {id} references missing region {r}")));
                }
            }
            if e.left == e.right {
                return Err(verr(format!("edge {id} has the same region on both sides")));
            }
            if e.panels == 0 {
                return Err(verr(format!("edge {id} needs at least one panel")));
            }
            let dir = vertices[e.v_end] - vertices[e.v_start];
            let length = dir.norm();
            if length < VERTEX_TOL {
                return Err(verr(format!("edge {id} has zero length")));
            }
            specs.push(EdgeSpec {
                id,
                v_start: e.v_start,
                v_end: e.v_end,
                left_region: e.left,
                right_region: e.right,
                length,
                normal: perp_normal(dir),
                panels_per_edge: e.panels,
            });
        }
        let mut mesh = CompositeMesh { vertices, edges: specs, regions, junctions: vec![], corners: vec![] };
        let incident = mesh.incidence();
        for (v, inc) in incident.iter().enumerate() {
            match inc.len() {
                0 | 2 | 3 => {}
                1 => return Err(verr(format!("vertex {v} has a single dangling edge"))),
                n => return Err(verr(format!("vertex {v} has {n} incident edges (at most 3 allowed)"))),
            }
        }
        mesh.check_sectors(&incident)?;
        mesh.junctions = detect_junctions(&mesh);
        mesh.corners = incident
            .iter()
            .enumerate()
            .filter(|(_, inc)| inc.len() == 2)
            .map(|(v, inc)| Corner { vertex: v, edges: [inc[0], inc[1]] })
            .collect();
        Ok(mesh)
    }

    /// Incident edge ids per vertex.
    pub fn incidence(&self) -> Vec<Vec<usize>> {
        let mut inc = vec![Vec::new(); self.vertices.len()];
        for e in &self.edges {
            inc[e.v_start].push(e.id);
            inc[e.v_end].push(e.id);
        }
        inc
    }

    pub fn region(&self, id: usize) -> &Region {
        self.regions.iter().find(|r| r.id == id).expect("region ids are validated")
    }

    /// Outgoing direction angle of `edge` at `vertex`, in [0, 2π).
    pub fn outgoing_angle(&self, edge: usize, vertex: usize) -> f64 {
        let e = &self.edges[edge];
        let other = if e.v_start == vertex { e.v_end } else { e.v_start };
        let d = self.vertices[other] - self.vertices[vertex];
        let a = d.y.atan2(d.x);
        if a < 0.0 {
            a + TWO_PI
        } else {
            a
        }
    }

    /// Regions on the counterclockwise and clockwise sides of an edge seen
    /// as leaving `vertex`.
    fn sides(&self, edge: usize, vertex: usize) -> (usize, usize) {
        let e = &self.edges[edge];
        if e.v_start == vertex {
            (e.left_region, e.right_region)
        } else {
            (e.right_region, e.left_region)
        }
    }

    /// Edges around `vertex` sorted counterclockwise by outgoing angle.
    pub fn sorted_edges(&self, vertex: usize, inc: &[usize]) -> Vec<(usize, f64)> {
        let mut v: Vec<(usize, f64)> = inc.iter().map(|&e| (e, self.outgoing_angle(e, vertex))).collect();
        v.sort_by(|x, y| x.1.partial_cmp(&y.1).unwrap().then(x.0.cmp(&y.0)));
        v
    }

    fn check_sectors(&self, incident: &[Vec<usize>]) -> Result<()> {
        for (v, inc) in incident.iter().enumerate() {
            if inc.len() < 2 {
                continue;
            }
            let sorted = self.sorted_edges(v, inc);
            for k in 0..sorted.len() {
                let (e0, a0) = sorted[k];
                let (e1, a1) = sorted[(k + 1) % sorted.len()];
                if (a1 - a0).abs() < 1e-14 {
                    return Err(verr(format!("edges {e0} and {e1} overlap at vertex {v}")));
                }
                let ccw_of_e0 = self.sides(e0, v).0;
                let cw_of_e1 = self.sides(e1, v).1;
                if ccw_of_e0 != cw_of_e1 {
                    return Err(verr(format!(
                        "inconsistent regions between edges {e0} and {e1} at vertex {v}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Region ids other than the exterior.
    pub fn interior_regions(&self) -> Vec<usize> {
        self.regions.iter().map(|r| r.id).filter(|&id| id != 0).collect()
    }

    /// Edge coefficient (μ_ℓν_r − μ_rν_ℓ)/(μ_ℓν_r + μ_rν_ℓ) multiplying the
    /// double layer in the σ equation.
    pub fn edge_d(&self, edge: usize) -> f64 {
        let e = &self.edges[edge];
        material_d(self.region(e.left_region), self.region(e.right_region))
    }

    /// Point on `edge` at arclength `s` from its start.
    pub fn point_on_edge(&self, edge: usize, s: f64) -> Vec2 {
        let e = &self.edges[edge];
        self.vertices[e.v_start] + e.tangent() * s
    }

    /// Apply `f` to every vertex coordinate.
    pub fn map_vertices(&self, f: impl Fn(Vec2) -> Vec2) -> Result<Self> {
        let inputs: Vec<EdgeInput> = self
            .edges
            .iter()
            .map(|e| EdgeInput {
                v_start: e.v_start,
                v_end: e.v_end,
                left: e.left_region,
                right: e.right_region,
                panels: e.panels_per_edge,
            })
            .collect();
        CompositeMesh::new(self.vertices.iter().map(|&p| f(p)).collect(), self.regions.clone(), &inputs)
    }

    /// The edge list in input form, for rebuilding.
    pub fn edge_inputs(&self) -> Vec<EdgeInput> {
        self.edges
            .iter()
            .map(|e| EdgeInput {
                v_start: e.v_start,
                v_end: e.v_end,
                left: e.left_region,
                right: e.right_region,
                panels: e.panels_per_edge,
            })
            .collect()
    }

    /// Signed area of the region, positive when its boundary is traversed
    /// counterclockwise (region on the left).
    pub fn region_area(&self, id: usize) -> f64 {
        let mut a = 0.0;
        for e in &self.edges {
            let p = self.vertices[e.v_start];
            let q = self.vertices[e.v_end];
            let cross = p.x * q.y - p.y * q.x;
            if e.left_region == id {
                a += 0.5 * cross;
            }
            if e.right_region == id {
                a -= 0.5 * cross;
            }
        }
        a
    }

    /// Winding number of the boundary of region `id` around `p`. Exterior
    /// points give 0 for bounded regions; region 0 is the complement of the rest.
    pub fn winding_number(&self, id: usize, p: Vec2) -> f64 {
        let mut w = 0.0;
        for e in &self.edges {
            let sign = if e.left_region == id {
                1.0
            } else if e.right_region == id {
                -1.0
            } else {
                continue;
            };
            let a = self.vertices[e.v_start] - p;
            let b = self.vertices[e.v_end] - p;
            w += sign * (a.x * b.y - a.y * b.x).atan2(a.dot(&b));
        }
        w / TWO_PI
    }

    /// Region containing `p` (0 if none of the bounded regions contain it).
    pub fn locate(&self, p: Vec2) -> usize {
        for r in &self.regions {
            if r.id != 0 && self.winding_number(r.id, p) > 0.5 {
                return r.id;
            }
        }
        0
    }

    /// Distance from `p` to the nearest edge.
    pub fn distance_to_boundary(&self, p: Vec2) -> f64 {
        self.edges
            .iter()
            .map(|e| segment_distance(p, self.vertices[e.v_start], self.vertices[e.v_end]))
            .fold(f64::INFINITY, f64::min)
    }

    /// Axis-aligned bounding box (min, max) of all vertices.
    pub fn bounding_box(&self) -> (Vec2, Vec2) {
        let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = -lo;
        for p in &self.vertices {
            lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        (lo, hi)
    }
}

/// Distance from `p` to the segment [a, b].
pub fn segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let d = b - a;
    let t = ((p - a).dot(&d) / d.norm_squared()).clamp(0.0, 1.0);
    (p - (a + d * t)).norm()
}

/// One [`Junction`] per vertex with exactly three incident edges.
pub fn detect_junctions(mesh: &CompositeMesh) -> Vec<Junction> {
    let mut out = Vec::new();
    for (v, inc) in mesh.incidence().iter().enumerate() {
        if inc.len() != 3 {
            continue;
        }
        let sorted = mesh.sorted_edges(v, inc);
        // sorted[0] = Γ(3,1), sorted[1] = Γ(1,2), sorted[2] = Γ(2,3)
        let gap = |k: usize| {
            let a0 = sorted[k].1;
            let a1 = sorted[(k + 1) % 3].1;
            let g = a1 - a0;
            if g <= 0.0 {
                g + TWO_PI
            } else {
                g
            }
        };
        let theta1 = gap(0);
        let theta2 = gap(1);
        let theta3 = TWO_PI - theta1 - theta2;
        let r1 = mesh.sides(sorted[0].0, v).0;
        let r2 = mesh.sides(sorted[1].0, v).0;
        let r3 = mesh.sides(sorted[2].0, v).0;
        let (m1, m2, m3) = (mesh.region(r1), mesh.region(r2), mesh.region(r3));
        let d12 = material_d(m1, m2);
        let d23 = material_d(m2, m3);
        let d31 = material_d(m3, m1);
        let edges = [sorted[1].0, sorted[2].0, sorted[0].0];
        let outgoing = edges.map(|e| mesh.edges[e].v_start == v);
        out.push(Junction {
            vertex: v,
            edges,
            outgoing,
            regions: [r1, r2, r3],
            angles: [theta1, theta2, theta3],
            materials: [d31, d12, d23],
        });
    }
    out
}

/// c = −(a+b)/(1+ab), the third material constant of a junction.
pub fn third_material(a: f64, b: f64) -> f64 {
    -(a + b) / (1.0 + a * b)
}
