//! Panels and the √w-scaled Nyström matrices for the double-layer
//! transmission equation and its adjoint.
//!
//! The unknowns are samples σ̄_q = σ(x_q)√W_q with W_q the arclength
//! weight of node q. Rows are M̃ = −I/2 + Δ X̃ where Δ holds the edge
//! material coefficient of each target node and X̃ is the scaled
//! double-layer coupling. The adjoint equation uses −I/2 + Δ X̃ᵀ.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use nalgebra::{DMatrix, DVector};
use num_traits::Float;

use crate::cornerbasis::rule::{CornerRule, GRID_ORDER, GRID_PANELS};
use crate::error::{Error, ErrorKind, Result};
use crate::geometry::{perp_normal, segment_distance, CompositeMesh, Vec2, TWO_PI};
use crate::potentials::{lagrange_product_weights, layer_kernel, LayerKind};
use crate::quad::{adaptive_vec, GaussLegendre};

/// Smallest admissible angle between consecutive edges at a vertex.
pub const ANGLE_GUARD: f64 = PI / 12.0;
/// Source panels closer than this many panel lengths use product rules.
pub const NEAR_FACTOR: f64 = 1.5;
/// Reference-grid panels closer than this many of their own lengths are
/// integrated adaptively; farther ones use their 30-point rule directly.
pub const GRID_NEAR_FACTOR: f64 = 0.5;
/// Absolute tolerance of the adaptive near-field integrals.
pub const NEAR_TOL: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PanelKind {
    Smooth,
    /// Local parameter t ∈ [0, 1] measures distance from `vertex`.
    Corner { vertex: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Panel {
    pub edge: usize,
    /// Parameter interval along the edge (0 at v_start).
    pub s0: f64,
    pub s1: f64,
    pub kind: PanelKind,
    pub nodes: Vec<Vec2>,
    /// Arclength quadrature weights.
    pub weights: Vec<f64>,
    /// Edge normal, pointing from the left region to the right one.
    pub normal: Vec2,
    /// Panel endpoints in edge orientation.
    pub a: Vec2,
    pub b: Vec2,
    /// Corner panels: x(t) = origin + dir·len·t.
    pub origin: Vec2,
    pub dir: Vec2,
    /// Index of the first node in the global numbering.
    pub offset: usize,
}

impl Panel {
    pub fn len(&self) -> f64 {
        (self.b - self.a).norm()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn is_corner(&self) -> bool {
        matches!(self.kind, PanelKind::Corner { .. })
    }

    pub fn smooth(edge: usize, a: Vec2, b: Vec2, s: (f64, f64), rule: &GaussLegendre) -> Self {
        let half = 0.5 * (b - a).norm();
        let nodes = rule.nodes.iter().map(|&u| (a + b) * 0.5 + (b - a) * (0.5 * u)).collect();
        let weights = rule.weights.iter().map(|w| w * half).collect();
        Panel {
            edge,
            s0: s.0,
            s1: s.1,
            kind: PanelKind::Smooth,
            nodes,
            weights,
            normal: perp_normal(b - a),
            a,
            b,
            origin: a,
            dir: (b - a) / (2.0 * half),
            offset: 0,
        }
    }

    /// Corner panel from `origin` along unit `dir` of length `len`; `toward`
    /// tells whether the edge runs away from (true) or into the vertex.
    pub fn corner(edge: usize, vertex: usize, origin: Vec2, dir: Vec2, len: f64, away: bool, s: (f64, f64), rule: &CornerRule) -> Self {
        let far = origin + dir * len;
        let (a, b) = if away { (origin, far) } else { (far, origin) };
        Panel {
            edge,
            s0: s.0,
            s1: s.1,
            kind: PanelKind::Corner { vertex },
            nodes: rule.nodes.iter().map(|&t| origin + dir * (len * t)).collect(),
            weights: rule.weights.iter().map(|w| w * len).collect(),
            normal: perp_normal(b - a),
            a,
            b,
            origin,
            dir,
            offset: 0,
        }
    }
}

/// Reject vertices where two consecutive edges meet at an angle outside
/// (π/12, 2π − π/12).
pub fn check_angles(mesh: &CompositeMesh) -> Result<()> {
    let inc = mesh.incidence();
    for (v, edges) in inc.iter().enumerate() {
        if edges.len() < 2 {
            continue;
        }
        let sorted = mesh.sorted_edges(v, edges);
        for k in 0..sorted.len() {
            let next = sorted[(k + 1) % sorted.len()].1;
            let mut gap = next - sorted[k].1;
            if gap <= 0.0 {
                gap += TWO_PI;
            }
            if gap < ANGLE_GUARD || gap > TWO_PI - ANGLE_GUARD {
                return Err(Error::new(
                    ErrorKind::Validation,
                    "check_angles",
                    format!("vertex {v} has an angle of {gap:.6} rad outside (pi/12, 2pi - pi/12)"),
                ));
            }
        }
    }
    Ok(())
}

/// Split each edge into equal panels; panels touching a vertex become
/// corner panels. `panels_per_edge` overrides the per-edge counts.
pub fn build_panels(mesh: &CompositeMesh, rule: &CornerRule, q: usize, panels_per_edge: Option<usize>) -> Result<Vec<Panel>> {
    if q < 2 {
        return Err(Error::new(ErrorKind::Validation, "build_panels", "smooth order must be at least 2"));
    }
    let gl = GaussLegendre::new(q);
    let mut out = Vec::new();
    let mut offset = 0;
    for (e, edge) in mesh.edges.iter().enumerate() {
        let np = panels_per_edge.unwrap_or(edge.panels_per_edge);
        if np < 2 {
            return Err(Error::new(
                ErrorKind::Validation,
                "build_panels",
                format!("edge {e} needs at least 2 panels so both end panels can be corner panels, got {np}"),
            ));
        }
        let pa = mesh.vertices[edge.v_start];
        let pb = mesh.vertices[edge.v_end];
        let len = edge.length / np as f64;
        let tan = edge.tangent();
        for k in 0..np {
            let s = (k as f64 / np as f64, (k + 1) as f64 / np as f64);
            let mut panel = if k == 0 {
                Panel::corner(e, edge.v_start, pa, tan, len, true, s, rule)
            } else if k + 1 == np {
                Panel::corner(e, edge.v_end, pb, -tan, len, false, s, rule)
            } else {
                Panel::smooth(e, pa + (pb - pa) * s.0, pa + (pb - pa) * s.1, s, &gl)
            };
            panel.normal = edge.normal;
            panel.offset = offset;
            offset += panel.nodes.len();
            out.push(panel);
        }
    }
    Ok(out)
}

/// Row-wise assembler of the scaled coupling X̃; rows are independent so
/// callers may evaluate them concurrently.
pub struct Assembler<'a> {
    panels: &'a [Panel],
    d_edge: Vec<f64>,
    grid_breaks: Vec<f64>,
    grid_nodes: Vec<f64>,
    grid_weights: Vec<f64>,
    grid_rule: GaussLegendre,
    grid_map: DMatrix<f64>,
    smooth_rules: Vec<(usize, GaussLegendre)>,
    integrator: GaussLegendre,
    pub nodes: Vec<Vec2>,
    pub weights: Vec<f64>,
    pub panel_of: Vec<usize>,
}

impl<'a> Assembler<'a> {
    /// `d_edge[e]` is the material coefficient of edge e.
    pub fn new(panels: &'a [Panel], d_edge: Vec<f64>, rule: &CornerRule) -> Self {
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut panel_of = Vec::new();
        let mut smooth_rules: Vec<(usize, GaussLegendre)> = Vec::new();
        for (i, p) in panels.iter().enumerate() {
            nodes.extend_from_slice(&p.nodes);
            weights.extend_from_slice(&p.weights);
            panel_of.extend(core::iter::repeat(i).take(p.nodes.len()));
            if !p.is_corner() && !smooth_rules.iter().any(|(q, _)| *q == p.nodes.len()) {
                smooth_rules.push((p.nodes.len(), GaussLegendre::new(p.nodes.len())));
            }
        }
        Assembler {
            panels,
            d_edge,
            grid_breaks: rule.grid_breaks.clone(),
            grid_nodes: rule.grid_nodes.clone(),
            grid_weights: rule.grid_weights.clone(),
            grid_rule: GaussLegendre::new(GRID_ORDER),
            grid_map: rule.grid_map(),
            smooth_rules,
            integrator: GaussLegendre::new(16),
            nodes,
            weights,
            panel_of,
        }
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn d_node(&self, p: usize) -> f64 {
        self.d_edge[self.panels[self.panel_of[p]].edge]
    }

    fn smooth_rule(&self, q: usize) -> &GaussLegendre {
        &self.smooth_rules.iter().find(|(n, _)| *n == q).expect("rule registered").1
    }

    /// Row p of X̃ (without the material factor or the −1/2 diagonal).
    pub fn coupling_row(&self, p: usize) -> Result<Vec<f64>> {
        let y = self.nodes[p];
        let sp = self.weights[p].sqrt();
        let own_edge = self.panels[self.panel_of[p]].edge;
        let mut row = vec![0.0; self.n()];
        for (pi, src) in self.panels.iter().enumerate() {
            // Straight edges: the kernel vanishes along the edge itself.
            if src.edge == own_edge {
                continue;
            }
            debug_assert!((src.normal - perp_normal(src.b - src.a)).norm() < 1e-12);
            let len = src.len();
            let near = segment_distance(y, src.a, src.b) < NEAR_FACTOR * len;
            let cols = src.offset..src.offset + src.nodes.len();
            if !near {
                for (j, c) in cols.enumerate() {
                    let k = layer_kernel(LayerKind::D, src.nodes[j], src.normal, y, src.normal);
                    row[c] = sp * k * self.weights[c].sqrt();
                }
                continue;
            }
            let weights = if src.is_corner() {
                let wg = self.corner_grid_weights(src, y).map_err(|e| self.pair_error(p, pi, e))?;
                let scale = 1.0 / len.sqrt();
                let mut out = vec![0.0; src.nodes.len()];
                for (g, &w) in wg.iter().enumerate() {
                    if w != 0.0 {
                        for (j, o) in out.iter_mut().enumerate() {
                            *o += w * self.grid_map[(g, j)];
                        }
                    }
                }
                out.iter_mut().for_each(|o| *o *= scale);
                out
            } else {
                let rule = self.smooth_rule(src.nodes.len());
                let lam = lagrange_product_weights(src.a, src.b, rule, y, src.normal, LayerKind::D, &self.integrator, NEAR_TOL)
                    .map_err(|e| self.pair_error(p, pi, e))?;
                lam.iter().zip(cols.clone()).map(|(l, c)| l / self.weights[c].sqrt()).collect()
            };
            for (j, c) in cols.enumerate() {
                row[c] = sp * weights[j];
            }
        }
        Ok(row)
    }

    fn pair_error(&self, p: usize, panel: usize, e: Error) -> Error {
        Error::new(
            e.kind,
            "assemble_kdir",
            format!("target node {p} against source panel {panel} (edge {}): {}", self.panels[panel].edge, e.detail),
        )
    }

    /// ∫ K(x(t), y) ℓ_g(t) ds over a corner panel for every reference-grid
    /// Lagrange basis function ℓ_g.
    fn corner_grid_weights(&self, src: &Panel, y: Vec2) -> Result<Vec<f64>> {
        let len = src.len();
        let mut out = vec![0.0; GRID_PANELS * GRID_ORDER];
        let mut basis = vec![0.0; GRID_ORDER];
        for gp in 0..GRID_PANELS {
            let (ta, tb) = (self.grid_breaks[gp], self.grid_breaks[gp + 1]);
            let xa = src.origin + src.dir * (len * ta);
            let xb = src.origin + src.dir * (len * tb);
            let h = len * (tb - ta);
            let slot = &mut out[gp * GRID_ORDER..(gp + 1) * GRID_ORDER];
            if segment_distance(y, xa, xb) >= GRID_NEAR_FACTOR * h {
                for (q, s) in slot.iter_mut().enumerate() {
                    let g = gp * GRID_ORDER + q;
                    let x = src.origin + src.dir * (len * self.grid_nodes[g]);
                    *s = layer_kernel(LayerKind::D, x, src.normal, y, src.normal) * len * self.grid_weights[g];
                }
                continue;
            }
            let rule = &self.grid_rule;
            let mut f = |u: f64, o: &mut [f64]| {
                let t = 0.5 * (ta + tb) + 0.5 * (tb - ta) * u;
                let x = src.origin + src.dir * (len * t);
                let k = layer_kernel(LayerKind::D, x, src.normal, y, src.normal) * 0.5 * h;
                rule.lagrange(u, &mut basis);
                for (oo, l) in o.iter_mut().zip(&basis) {
                    *oo = k * l;
                }
            };
            let w = adaptive_vec(&self.integrator, &mut f, -1.0, 1.0, GRID_ORDER, NEAR_TOL, 52).map_err(|e| {
                Error::new(
                    ErrorKind::Quadrature,
                    "corner_grid_weights",
                    format!("adaptive integration did not converge on grid panel {gp} near u in [{:.3e}, {:.3e}]", e.a, e.b),
                )
            })?;
            slot.copy_from_slice(&w);
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NystromSystem {
    pub panels: Vec<Panel>,
    pub nodes: Vec<Vec2>,
    pub weights: Vec<f64>,
    pub panel_of: Vec<usize>,
    /// Material coefficient of each node's edge.
    pub d: Vec<f64>,
    /// Scaled double-layer coupling X̃.
    pub coupling: DMatrix<f64>,
    /// M̃ = −I/2 + Δ X̃.
    pub matrix: DMatrix<f64>,
}

impl NystromSystem {
    pub fn from_rows(asm: &Assembler, panels: Vec<Panel>, rows: Vec<Vec<f64>>) -> Self {
        let n = asm.n();
        let coupling = DMatrix::from_fn(n, n, |r, c| rows[r][c]);
        let d: Vec<f64> = (0..n).map(|p| asm.d_node(p)).collect();
        let mut matrix = DMatrix::from_fn(n, n, |r, c| d[r] * coupling[(r, c)]);
        for i in 0..n {
            matrix[(i, i)] -= 0.5;
        }
        NystromSystem {
            panels,
            nodes: asm.nodes.clone(),
            weights: asm.weights.clone(),
            panel_of: asm.panel_of.clone(),
            d,
            coupling,
            matrix,
        }
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    /// −I/2 + Δ X̃ᵀ: the transposed discretization with the material factor
    /// kept on the target side.
    pub fn adjoint_matrix(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut m = DMatrix::from_fn(n, n, |r, c| self.d[r] * self.coupling[(c, r)]);
        for i in 0..n {
            m[(i, i)] -= 0.5;
        }
        m
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.matrix * x
    }

    pub fn apply_adjoint(&self, x: &DVector<f64>) -> DVector<f64> {
        let y = self.coupling.tr_mul(x);
        DVector::from_fn(self.n(), |i, _| self.d[i] * y[i] - 0.5 * x[i])
    }

    pub fn normal(&self, p: usize) -> Vec2 {
        self.panels[self.panel_of[p]].normal
    }

    pub fn edge_of(&self, p: usize) -> usize {
        self.panels[self.panel_of[p]].edge
    }
}

/// Serial assembly of the Dirichlet system.
pub fn assemble_kdir(mesh: &CompositeMesh, panels: Vec<Panel>, rule: &CornerRule) -> Result<NystromSystem> {
    check_angles(mesh)?;
    let d_edge = (0..mesh.edges.len()).map(|e| mesh.edge_d(e)).collect();
    let asm = Assembler::new(&panels, d_edge, rule);
    let rows = (0..asm.n()).map(|p| asm.coupling_row(p)).collect::<Result<Vec<_>>>()?;
    let sys = NystromSystem::from_rows(&asm, panels.clone(), rows);
    Ok(sys)
}

fn edge_media(mesh: &CompositeMesh, e: usize) -> (f64, f64, f64, f64) {
    let edge = &mesh.edges[e];
    let l = mesh.region(edge.left_region);
    let r = mesh.region(edge.right_region);
    (l.mu, l.nu, r.mu, r.nu)
}

/// √W-scaled samples of ν_ℓ ν_r f / (μ_r ν_ℓ + μ_ℓ ν_r); `f(edge, x)`.
pub fn build_rhs_dirichlet<F: Fn(usize, Vec2) -> f64>(mesh: &CompositeMesh, sys: &NystromSystem, f: F) -> DVector<f64> {
    DVector::from_fn(sys.n(), |p, _| {
        let e = sys.edge_of(p);
        let (ml, nl, mr, nr) = edge_media(mesh, e);
        sys.weights[p].sqrt() * nl * nr * f(e, sys.nodes[p]) / (mr * nl + ml * nr)
    })
}

/// √W-scaled samples of −μ_ℓ μ_r g / (μ_r ν_ℓ + μ_ℓ ν_r); `g(edge, x)`.
pub fn build_rhs_neumann<F: Fn(usize, Vec2) -> f64>(mesh: &CompositeMesh, sys: &NystromSystem, g: F) -> DVector<f64> {
    DVector::from_fn(sys.n(), |p, _| {
        let e = sys.edge_of(p);
        let (ml, nl, mr, nr) = edge_media(mesh, e);
        -sys.weights[p].sqrt() * ml * mr * g(e, sys.nodes[p]) / (mr * nl + ml * nr)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cornerbasis::{potential_of_power_density, series_terms, Problem};
    use crate::exponents::{find_branches, JunctionParams};
    use crate::geometry::{EdgeInput, Region};
    use crate::oracle::{integral, rule, square};

    #[test]
    fn panel_layout() {
        let mesh = square(2.0, 1.0, 3);
        let panels = build_panels(&mesh, rule(), 16, None).unwrap();
        assert_eq!(panels.len(), 12);
        let kinds: Vec<bool> = panels[..3].iter().map(|p| p.is_corner()).collect();
        assert_eq!(kinds, vec![true, false, true]);
        let k = rule().k();
        assert_eq!(panels.iter().map(|p| p.nodes.len()).sum::<usize>(), 4 * (2 * k + 16));
        // t = 0 sits at the vertex.
        let last = &panels[2];
        assert!((last.origin - mesh.vertices[1]).norm() < 1e-15);
        let wsum: f64 = panels[..3].iter().flat_map(|p| p.weights.iter()).sum();
        assert!((wsum - 1.0).abs() < 1e-13);
        assert!(build_panels(&mesh, rule(), 16, Some(1)).is_err());
    }

    #[test]
    fn decoupled_media_give_minus_half() {
        let mesh = square(1.0, 1.0, 3);
        let panels = build_panels(&mesh, rule(), 16, None).unwrap();
        let sys = assemble_kdir(&mesh, panels, rule()).unwrap();
        let n = sys.n();
        assert_eq!(sys.matrix, DMatrix::identity(n, n) * -0.5);
    }

    #[test]
    fn gauss_identity_rows() {
        // Σ_q X̃_pq √W_q equals D[1] at the boundary point x_p, which for a
        // square with outward normals is −1/2 (interior limit −1 plus the
        // jump 1/2 for a smooth point) away from corners.
        let mesh = square(2.0, 1.0, 3);
        let panels = build_panels(&mesh, rule(), 16, None).unwrap();
        let sys = assemble_kdir(&mesh, panels, rule()).unwrap();
        let ones = DVector::from_iterator(sys.n(), sys.weights.iter().map(|w| w.sqrt()));
        let dl = &sys.coupling * &ones;
        for p in 0..sys.n() {
            let x = sys.nodes[p];
            // Exact principal value: −(interior angle seen)/(2π) contributions
            // of the other three sides, evaluated by the oracle.
            let e = sys.edge_of(p);
            let scaled = dl[p] / sys.weights[p].sqrt();
            let dist = mesh.edges.iter().map(|e| (mesh.vertices[e.v_start] - x).norm()).fold(f64::INFINITY, f64::min);
            if dist > 1e-3 && p % 5 == 0 {
                let mut exact = 0.0;
                for (k, edge) in mesh.edges.iter().enumerate() {
                    if k == e {
                        continue;
                    }
                    let a = mesh.vertices[edge.v_start];
                    let b = mesh.vertices[edge.v_end];
                    let n = edge.normal;
                    exact += integral(
                        |s| {
                            let src = a + (b - a) * s;
                            n.dot(&(x - src)) / (2.0 * PI * (x - src).norm_squared())
                        },
                        0.0,
                        1.0,
                    );
                }
                assert!((scaled - exact).abs() < 1e-10, "p={p} {scaled} {exact}");
            }
            assert!((scaled + 0.5).abs() < 1e-10, "p={p} dist={dist:.2e} {scaled}");
        }
    }

    #[test]
    fn junction_matrix_reproduces_branch_potential() {
        // Three unit spokes from the origin with the branch density on them.
        let (t1, t2) = (PI / 2f64.sqrt(), PI / 3f64.sqrt());
        let p = JunctionParams::from_two_angles(t1, t2, 0.35, -0.4).unwrap();
        let dirs = [t1, t1 + t2, 0.0];
        // Vector order (1,2), (2,3), (3,1): Γ(3,1) at 0, Γ(1,2) at θ1, Γ(2,3) at θ1+θ2.
        let rule = rule();
        let gl = GaussLegendre::new(16);
        let mut panels = Vec::new();
        let mut offset = 0;
        for (e, &ang) in dirs.iter().enumerate() {
            let u = Vec2::new(ang.cos(), ang.sin());
            let mut c = Panel::corner(e, 0, Vec2::zeros(), u, 1.0 / 3.0, true, (0.0, 1.0 / 3.0), rule);
            let mut s = Panel::smooth(e, u / 3.0, u * (2.0 / 3.0), (1.0 / 3.0, 2.0 / 3.0), &gl);
            let mut f = Panel::smooth(e, u * (2.0 / 3.0), u, (2.0 / 3.0, 1.0), &gl);
            for pn in [&mut c, &mut s, &mut f] {
                pn.offset = offset;
                offset += pn.nodes.len();
            }
            panels.extend([c, s, f]);
        }
        // Mesh normals are the clockwise rotation, opposite to the junction
        // frame, so the frame coefficients change sign.
        let d = p.d().iter().map(|x| -x).collect();
        let asm = Assembler::new(&panels, d, rule);
        let rows: Vec<Vec<f64>> = (0..asm.n()).map(|q| asm.coupling_row(q).unwrap()).collect();
        let sys = NystromSystem::from_rows(&asm, panels.clone(), rows);
        for br in find_branches(&p, 3).into_iter().filter(|b| !b.degenerate) {
            let x = DVector::from_fn(sys.n(), |q, _| {
                let e = sys.edge_of(q);
                br.v[e] * sys.nodes[q].norm().powf(br.beta) * sys.weights[q].sqrt()
            });
            let y = sys.apply(&x);
            let mut worst: f64 = 0.0;
            let mut at = (0, 0.0);
            for q in 0..sys.n() {
                let t = sys.nodes[q].norm();
                if t > 0.9 {
                    continue;
                }
                let series = potential_of_power_density(&p, br.beta, &br.v, &[t], series_terms(20).max(400), Problem::Dirichlet);
                let want = series.values[0][sys.edge_of(q)];
                let err = (y[q] / sys.weights[q].sqrt() - want).abs();
                if err > worst {
                    worst = err;
                    at = (sys.edge_of(q), t);
                }
            }
            assert!(worst < 1e-10, "beta={} v={:?} worst={worst} at {at:?}", br.beta, br.v);
        }
    }

    #[test]
    fn angle_guard() {
        let v = vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(1.0, 0.1)];
        let regions = vec![Region { id: 0, mu: 1.0, nu: 1.0 }, Region { id: 1, mu: 2.0, nu: 1.0 }];
        let edges: Vec<EdgeInput> =
            (0..3).map(|k| EdgeInput { v_start: k, v_end: (k + 1) % 3, left: 1, right: 0, panels: 3 }).collect();
        let mesh = CompositeMesh::new(v, regions, &edges).unwrap();
        let err = check_angles(&mesh).unwrap_err();
        assert_eq!(err.kind, ErrorKind::Validation);
    }

    #[test]
    fn rhs_equal_media() {
        let mesh = square(1.0, 1.0, 3);
        let panels = build_panels(&mesh, rule(), 16, None).unwrap();
        let sys = assemble_kdir(&mesh, panels, rule()).unwrap();
        let r = build_rhs_dirichlet(&mesh, &sys, |_, x| x.x + 2.0);
        for p in 0..sys.n() {
            assert!((r[p] / sys.weights[p].sqrt() - (sys.nodes[p].x + 2.0) / 2.0).abs() < 1e-15);
        }
        let z = build_rhs_neumann(&mesh, &sys, |_, _| 0.0);
        assert_eq!(z.amax(), 0.0);
    }
}
