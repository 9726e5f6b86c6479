//! Off-boundary evaluation of the layer representation, manufactured
//! solution checks, polarization tensors and parameter sweeps.
//!
//! In region i the field is u_i = S[ρ]/μ_i + D[σ]/ν_i with both layers summed
//! over every edge. Densities are resampled onto short evaluation pieces so
//! that the far-field rule stays accurate down to three piece lengths from
//! the boundary.

pub mod sweep;
pub mod templates;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use nalgebra::DVector;
use num_traits::Float;

use crate::cornerbasis::CornerRule;
use crate::discretize::{build_rhs_dirichlet, build_rhs_neumann, NystromSystem, PanelKind};
use crate::error::{Error, ErrorKind, Result};
use crate::geometry::{segment_distance, CompositeMesh, Vec2};
use crate::quad::GaussLegendre;
use crate::solve::{solve_dirichlet, solve_neumann_transpose, Method, SolveReport};

/// Gauss–Legendre order on every evaluation piece.
pub const EVAL_ORDER: usize = 20;
/// Smooth panels are split into this many pieces.
pub const SMOOTH_SPLIT: usize = 4;
/// Longest corner-panel piece, in units of the panel length.
pub const CORNER_PIECE: f64 = 0.125;
/// Targets closer than this many piece lengths are refused.
pub const NEAR_BAND: f64 = 3.0;

#[derive(Clone, Debug, PartialEq)]
struct EvalPiece {
    a: Vec2,
    b: Vec2,
    normal: Vec2,
    nodes: Vec<Vec2>,
    weights: Vec<f64>,
    sigma: Vec<f64>,
    rho: Vec<f64>,
}

impl EvalPiece {
    fn len(&self) -> f64 {
        (self.b - self.a).norm()
    }
}

/// Densities of a solved problem together with the media coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldSolution {
    pub mesh: CompositeMesh,
    /// √W-scaled σ samples.
    pub sigma: DVector<f64>,
    /// √W-scaled weak ρ samples.
    pub rho: DVector<f64>,
    /// (region id, 1/μ, 1/ν).
    pub coefficients: Vec<(usize, f64, f64)>,
    pieces: Vec<EvalPiece>,
}

fn piece_breaks(len_t: f64, max: f64) -> usize {
    (len_t / max).ceil().max(1.0) as usize
}

impl FieldSolution {
    pub fn new(mesh: &CompositeMesh, sys: &NystromSystem, rule: &CornerRule, sigma: DVector<f64>, rho: DVector<f64>) -> Result<Self> {
        if sigma.len() != sys.n() || rho.len() != sys.n() {
            return Err(Error::new(
                ErrorKind::Validation,
                "FieldSolution",
                format!("density lengths {} and {} do not match the system size {}", sigma.len(), rho.len(), sys.n()),
            ));
        }
        let gl = GaussLegendre::new(EVAL_ORDER);
        let mut pieces = Vec::new();
        let basis_t = rule.basis.transpose();
        for panel in &sys.panels {
            let range = panel.offset..panel.offset + panel.nodes.len();
            let sig = &sigma.as_slice()[range.clone()];
            let rh = &rho.as_slice()[range];
            match panel.kind {
                PanelKind::Smooth => {
                    let q = panel.nodes.len();
                    let src = GaussLegendre::new(q);
                    let sw: Vec<f64> = panel.weights.iter().map(|w| w.sqrt()).collect();
                    let sv: Vec<f64> = sig.iter().zip(&sw).map(|(s, w)| s / w).collect();
                    let rv: Vec<f64> = rh.iter().zip(&sw).map(|(s, w)| s / w).collect();
                    let mut lw = vec![0.0; q];
                    for k in 0..SMOOTH_SPLIT {
                        let u0 = k as f64 / SMOOTH_SPLIT as f64;
                        let u1 = (k + 1) as f64 / SMOOTH_SPLIT as f64;
                        let (us, ws) = gl.mapped(u0, u1);
                        let mut piece = EvalPiece {
                            a: panel.a + (panel.b - panel.a) * u0,
                            b: panel.a + (panel.b - panel.a) * u1,
                            normal: panel.normal,
                            nodes: Vec::with_capacity(us.len()),
                            weights: Vec::with_capacity(us.len()),
                            sigma: Vec::with_capacity(us.len()),
                            rho: Vec::with_capacity(us.len()),
                        };
                        for (&u, &w) in us.iter().zip(&ws) {
                            src.lagrange(2.0 * u - 1.0, &mut lw);
                            piece.nodes.push(panel.a + (panel.b - panel.a) * u);
                            piece.weights.push(w * panel.len());
                            piece.sigma.push(lw.iter().zip(&sv).map(|(l, v)| l * v).sum());
                            piece.rho.push(lw.iter().zip(&rv).map(|(l, v)| l * v).sum());
                        }
                        pieces.push(piece);
                    }
                }
                PanelKind::Corner { .. } => {
                    let len = panel.len();
                    let sl = len.sqrt();
                    // σ(len·t) = φ(t)ᵀ V σ̄/√len; the weak ρ is represented by
                    // its projection φ(t)ᵀ Bᵀ ρ̄/√len with B the sampled basis.
                    let sig_c = &rule.interp * DVector::from_column_slice(sig) / sl;
                    let rho_c = &basis_t * DVector::from_column_slice(rh) / sl;
                    let breaks = &rule.grid_breaks;
                    for g in 0..breaks.len() - 1 {
                        let (t0, t1) = (breaks[g], breaks[g + 1]);
                        let m = piece_breaks(t1 - t0, CORNER_PIECE);
                        for k in 0..m {
                            let a = t0 + (t1 - t0) * k as f64 / m as f64;
                            let b = t0 + (t1 - t0) * (k + 1) as f64 / m as f64;
                            let (ts, ws) = gl.mapped(a, b);
                            let mut piece = EvalPiece {
                                a: panel.origin + panel.dir * (len * a),
                                b: panel.origin + panel.dir * (len * b),
                                normal: panel.normal,
                                nodes: Vec::with_capacity(ts.len()),
                                weights: Vec::with_capacity(ts.len()),
                                sigma: Vec::with_capacity(ts.len()),
                                rho: Vec::with_capacity(ts.len()),
                            };
                            for (&t, &w) in ts.iter().zip(&ws) {
                                let phi = rule.eval_basis(t);
                                piece.nodes.push(panel.origin + panel.dir * (len * t));
                                piece.weights.push(w * len);
                                piece.sigma.push(phi.iter().zip(sig_c.iter()).map(|(p, c)| p * c).sum());
                                piece.rho.push(phi.iter().zip(rho_c.iter()).map(|(p, c)| p * c).sum());
                            }
                            pieces.push(piece);
                        }
                    }
                }
            }
        }
        let coefficients = mesh.regions.iter().map(|r| (r.id, 1.0 / r.mu, 1.0 / r.nu)).collect();
        Ok(FieldSolution { mesh: mesh.clone(), sigma, rho, coefficients, pieces })
    }

    /// Distance below which `target` is refused.
    pub fn near_band_violation(&self, target: Vec2) -> Option<f64> {
        self.pieces.iter().find_map(|p| {
            let d = segment_distance(target, p.a, p.b);
            (d < NEAR_BAND * p.len()).then_some(d)
        })
    }

    /// Raw layer sums (S[ρ], D[σ]) at `target`, without the band check.
    pub fn layer_sums(&self, target: Vec2) -> (f64, f64) {
        let mut s = 0.0;
        let mut d = 0.0;
        for p in &self.pieces {
            for (((x, w), sg), rh) in p.nodes.iter().zip(&p.weights).zip(&p.sigma).zip(&p.rho) {
                let r = target - x;
                let r2 = r.norm_squared();
                s -= w * rh * r2.ln() / (4.0 * PI);
                d += w * sg * p.normal.dot(&r) / (2.0 * PI * r2);
            }
        }
        (s, d)
    }
}

/// u_i(target) for `target` in region `region`.
pub fn eval_field(sol: &FieldSolution, target: Vec2, region: usize) -> Result<f64> {
    let Some(&(_, inv_mu, inv_nu)) = sol.coefficients.iter().find(|c| c.0 == region) else {
        return Err(Error::new(ErrorKind::Validation, "eval_field", format!("unknown region {region}")));
    };
    let found = sol.mesh.locate(target);
    if found != region {
        return Err(Error::new(
            ErrorKind::Validation,
            "eval_field",
            format!("target ({}, {}) lies in region {found}, not {region}", target.x, target.y),
        ));
    }
    if let Some(d) = sol.near_band_violation(target) {
        return Err(Error::new(
            ErrorKind::TooClose,
            "eval_field",
            format!("target at distance {d:.3e} from the boundary is inside the near band of {NEAR_BAND} piece lengths"),
        ));
    }
    let (s, d) = sol.layer_sums(target);
    Ok(inv_mu * s + inv_nu * d)
}

/// Sum of log-sources Σ_k log|x − c_k| and its gradient.
#[derive(Clone, Debug, PartialEq)]
pub struct LogSources {
    pub centers: Vec<Vec2>,
}

impl LogSources {
    pub fn value(&self, x: Vec2) -> f64 {
        self.centers.iter().map(|c| (x - c).norm().ln()).sum()
    }

    pub fn gradient(&self, x: Vec2) -> Vec2 {
        self.centers.iter().map(|c| (x - c) / (x - c).norm_squared()).sum()
    }
}

/// Ten sources on a circle of radius twice the region diameter around the
/// vertex centroid of each bounded region. Region 0 gets no sources.
pub fn default_sources(mesh: &CompositeMesh, per_region: usize) -> Vec<(usize, LogSources)> {
    let mut out = Vec::new();
    for (k, id) in mesh.interior_regions().into_iter().enumerate() {
        let mut verts: Vec<Vec2> = Vec::new();
        for e in mesh.edges.iter().filter(|e| e.left_region == id || e.right_region == id) {
            for v in [e.v_start, e.v_end] {
                if !verts.iter().any(|p| *p == mesh.vertices[v]) {
                    verts.push(mesh.vertices[v]);
                }
            }
        }
        let c = verts.iter().sum::<Vec2>() / verts.len() as f64;
        let mut diam: f64 = 0.0;
        for p in &verts {
            for q in &verts {
                diam = diam.max((p - q).norm());
            }
        }
        let r = 2.0 * diam;
        let phase = 0.37 * (k + 1) as f64;
        let centers = (0..per_region)
            .map(|j| {
                let a = phase + 2.0 * PI * j as f64 / per_region as f64;
                c + Vec2::new(a.cos(), a.sin()) * r
            })
            .collect();
        out.push((id, LogSources { centers }));
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorSample {
    pub x: f64,
    pub y: f64,
    pub region: usize,
    pub abs_err: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ManufacturedReport {
    /// (region, max abs error, number of targets).
    pub per_region: Vec<(usize, f64, usize)>,
    pub max_err: f64,
    pub samples: Vec<ErrorSample>,
    pub dirichlet: SolveReport,
    pub neumann: SolveReport,
    pub skipped: usize,
}

/// Exact field of the manufactured problem in `region`.
pub fn manufactured_exact(sources: &[(usize, LogSources)], region: usize, x: Vec2) -> f64 {
    sources.iter().find(|s| s.0 == region).map_or(0.0, |s| s.1.value(x))
}

fn manufactured_grad(sources: &[(usize, LogSources)], region: usize, x: Vec2) -> Vec2 {
    sources.iter().find(|s| s.0 == region).map_or(Vec2::zeros(), |s| s.1.gradient(x))
}

fn check_sources(mesh: &CompositeMesh, sources: &[(usize, LogSources)]) -> Result<()> {
    for (id, src) in sources {
        for c in &src.centers {
            if mesh.locate(*c) == *id {
                return Err(Error::new(
                    ErrorKind::Validation,
                    "manufactured_test",
                    format!("source ({}, {}) lies inside its own region {id}", c.x, c.y),
                ));
            }
        }
    }
    Ok(())
}

/// Right-hand sides (Dirichlet, Neumann) of the manufactured problem with
/// u_j = Σ log|x − c_{j,k}| in region j (u ≡ 0 where no sources are given).
pub fn manufactured_rhs(
    mesh: &CompositeMesh,
    sys: &NystromSystem,
    sources: &[(usize, LogSources)],
) -> Result<(DVector<f64>, DVector<f64>)> {
    check_sources(mesh, sources)?;
    let f = |e: usize, x: Vec2| {
        let edge = &mesh.edges[e];
        let l = mesh.region(edge.left_region);
        let r = mesh.region(edge.right_region);
        l.mu * manufactured_exact(sources, l.id, x) - r.mu * manufactured_exact(sources, r.id, x)
    };
    let g = |e: usize, x: Vec2| {
        let edge = &mesh.edges[e];
        let l = mesh.region(edge.left_region);
        let r = mesh.region(edge.right_region);
        let n = edge.normal;
        l.nu * n.dot(&manufactured_grad(sources, l.id, x)) - r.nu * n.dot(&manufactured_grad(sources, r.id, x))
    };
    Ok((build_rhs_dirichlet(mesh, sys, f), build_rhs_neumann(mesh, sys, g)))
}

/// Errors of a solved manufactured problem on the cell centers of a
/// `grid`×`grid` lattice over the bounding box; targets in the near band
/// are counted in the second value and skipped.
pub fn manufactured_errors(
    sol: &FieldSolution,
    sources: &[(usize, LogSources)],
    grid: usize,
) -> Result<(Vec<ErrorSample>, usize)> {
    let mesh = &sol.mesh;
    let (lo, hi) = mesh.bounding_box();
    let mut samples = Vec::new();
    let mut skipped = 0;
    for iy in 0..grid {
        for ix in 0..grid {
            let x = Vec2::new(
                lo.x + (hi.x - lo.x) * (ix as f64 + 0.5) / grid as f64,
                lo.y + (hi.y - lo.y) * (iy as f64 + 0.5) / grid as f64,
            );
            let region = mesh.locate(x);
            match eval_field(sol, x, region) {
                Ok(u) => samples.push(ErrorSample {
                    x: x.x,
                    y: x.y,
                    region,
                    abs_err: (u - manufactured_exact(sources, region, x)).abs(),
                }),
                Err(e) if e.kind == ErrorKind::TooClose => skipped += 1,
                Err(e) => return Err(e),
            }
        }
    }
    Ok((samples, skipped))
}

/// Per-region maxima and counts of a set of samples, with the overall
/// maximum.
pub fn summarize_errors(mesh: &CompositeMesh, samples: &[ErrorSample]) -> (Vec<(usize, f64, usize)>, f64) {
    let mut per_region: Vec<(usize, f64, usize)> = mesh.regions.iter().map(|r| (r.id, 0.0, 0)).collect();
    for s in samples {
        let slot = per_region.iter_mut().find(|p| p.0 == s.region).expect("located region exists");
        slot.1 = slot.1.max(s.abs_err);
        slot.2 += 1;
    }
    let max_err = samples.iter().map(|s| s.abs_err).fold(0.0, f64::max);
    (per_region, max_err)
}

/// Solve both equations with manufactured data and report the error on a
/// `grid`×`grid` bounding-box lattice, skipping targets in the near band.
pub fn manufactured_test(
    mesh: &CompositeMesh,
    sys: &NystromSystem,
    rule: &CornerRule,
    sources: &[(usize, LogSources)],
    grid: usize,
    method: Method,
    tol: f64,
) -> Result<ManufacturedReport> {
    let (rhs_d, rhs_n) = manufactured_rhs(mesh, sys, sources)?;
    let (sigma, dirichlet) = solve_dirichlet(sys, &rhs_d, method, tol)?;
    let (rho, neumann) = solve_neumann_transpose(sys, &rhs_n, method, tol)?;
    let sol = FieldSolution::new(mesh, sys, rule, sigma, rho)?;
    let (samples, skipped) = manufactured_errors(&sol, sources, grid)?;
    let (per_region, max_err) = summarize_errors(mesh, &samples);
    Ok(ManufacturedReport { per_region, max_err, samples, dirichlet, neumann, skipped })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolarizationTensor {
    /// p[d][l] = ∫ x_l ρ_d ds.
    pub p: [[f64; 2]; 2],
    /// ∫ ρ_d ds, zero for a charge-neutral solution.
    pub charge: [f64; 2],
    pub reports: [SolveReport; 2],
}

impl PolarizationTensor {
    pub fn asymmetry(&self) -> f64 {
        (self.p[0][1] - self.p[1][0]).abs()
    }
}

fn check_unit_mu(mesh: &CompositeMesh) -> Result<()> {
    if let Some(r) = mesh.regions.iter().find(|r| r.mu != 1.0) {
        return Err(Error::new(
            ErrorKind::Validation,
            "polarization",
            format!("region {} has mu = {}; the polarization setup needs mu = 1 and nu = permittivity", r.id, r.mu),
        ));
    }
    Ok(())
}

/// Right-hand side of the transposed solve for direction `d`:
/// g_d = (ε_ℓ − ε_r) n_d with ε = ν.
pub fn polarization_rhs(mesh: &CompositeMesh, sys: &NystromSystem, d: usize) -> Result<DVector<f64>> {
    check_unit_mu(mesh)?;
    let g = |e: usize, _x: Vec2| {
        let edge = &mesh.edges[e];
        (mesh.region(edge.left_region).nu - mesh.region(edge.right_region).nu) * edge.normal[d]
    };
    Ok(build_rhs_neumann(mesh, sys, g))
}

/// First moments ∫ x_l ρ ds and the total charge ∫ ρ ds of a scaled weak
/// density.
pub fn density_moments(sys: &NystromSystem, rho: &DVector<f64>) -> ([f64; 2], f64) {
    let mut m = [0.0; 2];
    let mut charge = 0.0;
    for q in 0..sys.n() {
        let w = sys.weights[q].sqrt() * rho[q];
        m[0] += sys.nodes[q].x * w;
        m[1] += sys.nodes[q].y * w;
        charge += w;
    }
    (m, charge)
}

/// Polarization tensor of a composite with μ_i = 1 and ν_i = ε_i, from two
/// transposed solves.
pub fn polarization(mesh: &CompositeMesh, sys: &NystromSystem, method: Method, tol: f64) -> Result<PolarizationTensor> {
    let mut p = [[0.0; 2]; 2];
    let mut charge = [0.0; 2];
    let mut reports = Vec::with_capacity(2);
    for d in 0..2 {
        let rhs = polarization_rhs(mesh, sys, d)?;
        let (rho, rep) = solve_neumann_transpose(sys, &rhs, method, tol)?;
        (p[d], charge[d]) = density_moments(sys, &rho);
        reports.push(rep);
    }
    let r1 = reports.pop().expect("two solves");
    let r0 = reports.pop().expect("two solves");
    Ok(PolarizationTensor { p, charge, reports: [r0, r1] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::{assemble_kdir, build_panels};
    use crate::oracle::{rule, square};
    use crate::solve::DEFAULT_TOL;

    #[test]
    fn zero_densities_give_zero() {
        let mesh = square(2.0, 0.5, 3);
        let panels = build_panels(&mesh, rule(), 16, None).unwrap();
        let sys = assemble_kdir(&mesh, panels, rule()).unwrap();
        let z = DVector::zeros(sys.n());
        let sol = FieldSolution::new(&mesh, &sys, rule(), z.clone(), z).unwrap();
        assert_eq!(eval_field(&sol, Vec2::new(0.5, 0.5), 1).unwrap(), 0.0);
        assert_eq!(eval_field(&sol, Vec2::new(0.5, 0.99), 1).unwrap_err().kind, ErrorKind::TooClose);
        assert_eq!(eval_field(&sol, Vec2::new(3.0, 0.5), 1).unwrap_err().kind, ErrorKind::Validation);
        assert!(FieldSolution::new(&mesh, &sys, rule(), DVector::zeros(3), DVector::zeros(3)).is_err());
    }

    #[test]
    fn square_manufactured_solution() {
        let mesh = square(2.0, 0.5, 3);
        let panels = build_panels(&mesh, rule(), 16, None).unwrap();
        let sys = assemble_kdir(&mesh, panels, rule()).unwrap();
        let src = default_sources(&mesh, 10);
        let rep = manufactured_test(&mesh, &sys, rule(), &src, 30, Method::Gmres, DEFAULT_TOL).unwrap();
        assert!(rep.max_err < 1e-10, "{}", rep.max_err);
    }

    fn two_triangle_system(ppe: usize) -> (CompositeMesh, NystromSystem) {
        let mesh = templates::two_triangle((1.0, 1.0), templates::TWO_TRIANGLE_MEDIA, ppe).unwrap();
        let panels = build_panels(&mesh, rule(), 16, None).unwrap();
        let sys = assemble_kdir(&mesh, panels, rule()).unwrap();
        (mesh, sys)
    }

    #[test]
    fn two_triangle_manufactured_solution() {
        let (mesh, sys) = two_triangle_system(3);
        let src = default_sources(&mesh, 10);
        let rep = manufactured_test(&mesh, &sys, rule(), &src, 40, Method::Gmres, DEFAULT_TOL).unwrap();
        assert!(rep.max_err < 1e-10, "{}", rep.max_err);
        assert!(rep.dirichlet.iterations <= 100 && rep.neumann.iterations <= 100);
        // Every region, the exterior included, sees targets and small errors.
        for &(id, err, count) in &rep.per_region {
            assert!(count > 0, "region {id} has no targets");
            assert!(err < 1e-10, "region {id}: {err}");
        }
    }

    #[test]
    fn exterior_field_decays() {
        let (mesh, sys) = two_triangle_system(2);
        let src = default_sources(&mesh, 10);
        let f = |e: usize, x: Vec2| {
            let edge = &mesh.edges[e];
            let l = mesh.region(edge.left_region);
            let r = mesh.region(edge.right_region);
            l.mu * manufactured_exact(&src, l.id, x) - r.mu * manufactured_exact(&src, r.id, x)
        };
        let rhs = build_rhs_dirichlet(&mesh, &sys, f);
        let (sigma, _) = solve_dirichlet(&sys, &rhs, Method::Lu, DEFAULT_TOL).unwrap();
        let sol = FieldSolution::new(&mesh, &sys, rule(), sigma, DVector::zeros(sys.n())).unwrap();
        let near = eval_field(&sol, Vec2::new(3.0, 0.0), 0).unwrap().abs();
        let far = eval_field(&sol, Vec2::new(1e4, 0.0), 0).unwrap().abs();
        // A double layer decays like 1/|x|.
        assert!(far < 1e-2 * near.max(1e-6) || far < 1e-8, "{near} {far}");
    }

    fn lattice_polarization(ppe: usize, shift: Vec2) -> PolarizationTensor {
        let lat = templates::hex_lattice(3, 0.1, (-1.0, 1.0), 11, ppe).unwrap();
        let mesh = lat.mesh.map_vertices(|v| v + shift).unwrap();
        let panels = build_panels(&mesh, rule(), 16, None).unwrap();
        let sys = assemble_kdir(&mesh, panels, rule()).unwrap();
        polarization(&mesh, &sys, Method::Gmres, DEFAULT_TOL).unwrap()
    }

    #[test]
    fn lattice_polarization_properties() {
        let coarse = lattice_polarization(3, Vec2::zeros());
        let fine = lattice_polarization(5, Vec2::zeros());
        let moved = lattice_polarization(3, Vec2::new(0.3, -0.2));
        assert!(coarse.asymmetry() < 1e-10, "{}", coarse.asymmetry());
        for d in 0..2 {
            assert!(coarse.charge[d].abs() < 1e-10, "{:?}", coarse.charge);
            for l in 0..2 {
                assert!((coarse.p[d][l] - fine.p[d][l]).abs() < 1e-10, "{:?} {:?}", coarse.p, fine.p);
                assert!((coarse.p[d][l] - moved.p[d][l]).abs() < 1e-10, "{:?} {:?}", coarse.p, moved.p);
            }
        }
        // A dielectric inclusion field: the diagonal is nonzero.
        assert!(coarse.p[0][0].abs() > 1e-3);
    }

    #[test]
    fn uniform_permittivity_has_no_polarization() {
        let lat = templates::hex_lattice(3, 0.1, (0.0, 0.0), 2, 2).unwrap();
        let panels = build_panels(&lat.mesh, rule(), 16, None).unwrap();
        let sys = assemble_kdir(&lat.mesh, panels, rule()).unwrap();
        let p = polarization(&lat.mesh, &sys, Method::Gmres, DEFAULT_TOL).unwrap();
        assert_eq!(p.p, [[0.0; 2]; 2]);
        let bad = square(2.0, 2.0, 2);
        let panels = build_panels(&bad, rule(), 16, None).unwrap();
        let sys = assemble_kdir(&bad, panels, rule()).unwrap();
        assert_eq!(polarization(&bad, &sys, Method::Lu, DEFAULT_TOL).unwrap_err().kind, ErrorKind::Validation);
    }
}
