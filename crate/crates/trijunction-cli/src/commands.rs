//! Argument parsing and one driver per command. Each driver writes its CSV
//! into the output directory and returns the manifest; `run` writes the
//! manifest next to it.

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::DVector;
use trijunction::exponents::{find_branches, linspace, JunctionParams};
use trijunction::geometry::TWO_PI;
use trijunction::postproc::sweep::{ab_media, ab_point, ab_template, angle_axis, angle_point, ab_axis, AB_MU, AB_NU3, ANGLE_MEDIA};
use trijunction::postproc::{
    default_sources, density_moments, manufactured_errors, manufactured_rhs, polarization_rhs, summarize_errors, FieldSolution,
};
use trijunction::solve::{solve_dirichlet, solve_neumann_transpose, Method};

use crate::assembly::assemble;
use crate::error::{CliError, CliResult};
use crate::geometry_io::{load_geometry, LatticeOptions, LoadedGeometry};
use crate::manifest::{Manifest, ReportRecord, Tolerances};
use crate::rule_cache::{ensure_rule, CachedRule, BETA_MAX, RULE_TOL};

/// Largest manufactured error `verify` accepts.
pub const VERIFY_TOL: f64 = 1e-10;
/// Log-sources per bounded region in the manufactured problem.
pub const SOURCES_PER_REGION: usize = 10;

#[derive(Parser, Clone, Debug, Serialize)]
#[command(name = "trijunction", version, about = "Laplace transmission problems on polygonal composites with triple junctions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Options,
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct Options {
    /// JSON geometry file, or builtin:two-triangle, builtin:diamond, builtin:lattice.
    #[arg(long, global = true)]
    pub geometry: Option<String>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Relative residual tolerance of the linear solves.
    #[arg(long, global = true, default_value_t = 5e-15)]
    pub tol: f64,
    /// Highest branch index i of the exponent scans.
    #[arg(long = "N", global = true, default_value_t = 5)]
    pub n: usize,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Points per axis (per command default when omitted).
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// Panels per edge; overrides the counts of a geometry file.
    #[arg(long, global = true)]
    pub panels_per_edge: Option<usize>,
    /// Gauss–Legendre order of smooth panels.
    #[arg(long, global = true, default_value_t = 16)]
    pub smooth_order: usize,
    #[arg(long, global = true, value_enum, default_value_t = MethodArg::Gmres)]
    pub method: MethodArg,
    /// Junction angles θ1 θ2 (θ3 = 2π − θ1 − θ2).
    #[arg(long, global = true, num_args = 2, value_names = ["THETA1", "THETA2"], allow_negative_numbers = true)]
    pub theta: Option<Vec<f64>>,
    /// Corner rule cache; defaults to corner_rule.bin in the output directory.
    #[arg(long, global = true)]
    pub rule: Option<PathBuf>,
    /// Cells across the bundled lattice (odd).
    #[arg(long, global = true, default_value_t = 3)]
    pub cells: usize,
    /// Vertex perturbation of the bundled lattice, in side lengths.
    #[arg(long, global = true, default_value_t = 0.1)]
    pub perturbation: f64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Lu,
    Gmres,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Lu => Method::Lu,
            MethodArg::Gmres => Method::Gmres,
        }
    }
}

#[derive(Subcommand, Clone, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Solve both transmission equations with manufactured data and write the densities.
    Solve,
    /// Singular exponents over an (a, b) grid for fixed angles.
    Exponents {
        /// Half-width of the (a, b) square.
        #[arg(long, default_value_t = 0.9)]
        limit: f64,
        /// Keep only branches with this index i.
        #[arg(long)]
        branch: Option<usize>,
    },
    /// Build or reuse the cached corner rule.
    CornerRule {
        #[arg(long, default_value_t = BETA_MAX)]
        beta_max: f64,
        #[arg(long, default_value_t = RULE_TOL)]
        rule_tol: f64,
    },
    /// Condition numbers over the material plane (a, b).
    SweepAb,
    /// Condition numbers over the junction angles (θ1, θ2).
    SweepAngles,
    /// Polarization tensor of a composite with unit μ.
    Polarization,
    /// Manufactured-solution check with an error map.
    Verify,
    /// Exponent branches with degeneracy flags over an (a, b) grid.
    DegeneracyScan {
        #[arg(long, default_value_t = 0.99)]
        limit: f64,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Exponents { .. } => "exponents",
            Command::CornerRule { .. } => "corner-rule",
            Command::SweepAb => "sweep-ab",
            Command::SweepAngles => "sweep-angles",
            Command::Polarization => "polarization",
            Command::Verify => "verify",
            Command::DegeneracyScan { .. } => "degeneracy-scan",
        }
    }
}

fn invalid(detail: impl Into<String>) -> CliError {
    CliError::new("validation", "cli", detail)
}

fn validate(cli: &Cli) -> CliResult<()> {
    let o = &cli.opts;
    if !(o.tol > 0.0 && o.tol <= 1e-6) {
        return Err(invalid(format!("--tol must lie in (0, 1e-6], got {}", o.tol)));
    }
    if o.smooth_order < 2 {
        return Err(invalid("--smooth-order must be at least 2"));
    }
    if o.grid == Some(0) {
        return Err(invalid("--grid must be positive"));
    }
    if o.panels_per_edge == Some(0) {
        return Err(invalid("--panels-per-edge must be positive"));
    }
    if let Some(t) = &o.theta {
        if !(t[0] > 0.0 && t[1] > 0.0 && t[0] + t[1] < TWO_PI) {
            return Err(invalid(format!("--theta needs positive angles with sum below 2π, got {t:?}")));
        }
    }
    match cli.command {
        Command::Exponents { limit, .. } | Command::DegeneracyScan { limit } if !(limit > 0.0 && limit < 1.0) => {
            Err(invalid(format!("--limit must lie in (0, 1), got {limit}")))
        }
        _ => Ok(()),
    }
}

/// Per-run state shared by the drivers.
struct Run<'a> {
    cli: &'a Cli,
    timings: BTreeMap<String, f64>,
    reports: Vec<ReportRecord>,
    outputs: Vec<String>,
    rule: Option<CachedRule>,
}

impl Run<'_> {
    fn opts(&self) -> &Options {
        &self.cli.opts
    }

    fn timed<T>(&mut self, name: &str, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let out = f();
        *self.timings.entry(name.to_string()).or_insert(0.0) += t.elapsed().as_secs_f64();
        out
    }

    fn rule_path(&self) -> PathBuf {
        self.opts().rule.clone().unwrap_or_else(|| self.opts().out.join("corner_rule.bin"))
    }

    fn rule(&mut self, beta_max: f64, tol: f64) -> CliResult<trijunction::cornerbasis::CornerRule> {
        if self.rule.is_none() {
            let path = self.rule_path();
            let cached = self.timed("corner_rule", || ensure_rule(&path, beta_max, tol))?;
            self.rule = Some(cached);
        }
        Ok(self.rule.as_ref().expect("just set").rule.clone())
    }

    fn panels(&self) -> usize {
        self.opts().panels_per_edge.unwrap_or(3)
    }

    fn geometry(&mut self, default: &str) -> CliResult<LoadedGeometry> {
        let o = self.opts();
        let spec = o.geometry.clone().unwrap_or_else(|| default.to_string());
        let lat = LatticeOptions { cells_across: o.cells, perturbation: o.perturbation, seed: o.seed, panels: self.panels() };
        let panels = self.panels();
        self.timed("geometry", || load_geometry(&spec, panels, lat))
    }

    /// Panel override for assembly: bundled meshes already carry the count.
    fn panel_override(&self, g: &LoadedGeometry) -> Option<usize> {
        if g.source.starts_with("builtin:") {
            None
        } else {
            self.opts().panels_per_edge
        }
    }

    fn csv_path(&mut self, name: &str) -> PathBuf {
        self.outputs.push(name.to_string());
        self.opts().out.join(name)
    }

    fn write_csv<R: Serialize>(&mut self, name: &str, rows: &[R]) -> CliResult<()> {
        let path = self.csv_path(name);
        let mut w = csv::Writer::from_path(&path)?;
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Parse and run, writing the manifest. Failures are returned, not printed.
pub fn run(cli: &Cli) -> CliResult<Manifest> {
    validate(cli)?;
    std::fs::create_dir_all(&cli.opts.out)
        .map_err(|e| CliError::new("io", "cli", format!("{}: {e}", cli.opts.out.display())))?;
    let mut run = Run { cli, timings: BTreeMap::new(), reports: Vec::new(), outputs: Vec::new(), rule: None };
    let start = Instant::now();
    let results = match &cli.command {
        Command::Solve => solve(&mut run)?,
        Command::Verify => verify(&mut run)?,
        Command::Exponents { limit, branch } => exponents(&mut run, *limit, *branch, "exponents.csv")?,
        Command::DegeneracyScan { limit } => exponents(&mut run, *limit, None, "degeneracy_scan.csv")?,
        Command::CornerRule { beta_max, rule_tol } => corner_rule(&mut run, *beta_max, *rule_tol)?,
        Command::SweepAb => sweep_ab(&mut run)?,
        Command::SweepAngles => sweep_angles(&mut run)?,
        Command::Polarization => polarization(&mut run)?,
    };
    run.timings.insert("total".into(), start.elapsed().as_secs_f64());
    let rule_tolerances = match &cli.command {
        Command::CornerRule { beta_max, rule_tol } => (*beta_max, *rule_tol),
        _ => (BETA_MAX, RULE_TOL),
    };
    let mut outputs = run.outputs;
    outputs.push("manifest.json".into());
    let manifest = Manifest {
        command: cli.command.name().into(),
        version: env!("CARGO_PKG_VERSION").into(),
        inputs: serde_json::to_value(cli)?,
        seed: cli.opts.seed,
        tolerances: Tolerances { solver: cli.opts.tol, rule_beta_max: rule_tolerances.0, rule_tol: rule_tolerances.1 },
        rule_hash: run.rule.as_ref().map(|r| r.hash.clone()),
        rule_built: run.rule.as_ref().map(|r| r.built),
        timings: run.timings,
        solve_reports: run.reports,
        results,
        outputs,
    };
    let text = serde_json::to_string_pretty(&manifest)?;
    std::fs::write(cli.opts.out.join("manifest.json"), text)?;
    Ok(manifest)
}

/// Whether a manifest reports a failed check.
pub fn failed(m: &Manifest) -> bool {
    m.results.get("passed").and_then(|v| v.as_bool()) == Some(false)
}

/// Run as the binary does: the stdout line on success, or the error JSON
/// for stderr (also written to `error.json` when the output directory
/// exists) on failure.
pub fn execute(cli: &Cli) -> Result<String, String> {
    match run(cli) {
        Ok(m) if failed(&m) => {
            let detail = format!("check failed; see {}", cli.opts.out.join("manifest.json").display());
            Err(CliError::new("verification", m.command.as_str(), detail).to_json())
        }
        Ok(m) => Ok(format!("{}: wrote {}", m.command, m.outputs.join(", "))),
        Err(e) => {
            let json = e.to_json();
            if cli.opts.out.is_dir() {
                let _ = std::fs::write(cli.opts.out.join("error.json"), &json);
            }
            Err(json)
        }
    }
}

struct Solved {
    geometry: LoadedGeometry,
    sys: trijunction::discretize::NystromSystem,
    sources: Vec<(usize, trijunction::postproc::LogSources)>,
    sigma: DVector<f64>,
    rho: DVector<f64>,
}

fn solve_manufactured(run: &mut Run) -> CliResult<Solved> {
    let rule = run.rule(BETA_MAX, RULE_TOL)?;
    let geometry = run.geometry("builtin:two-triangle")?;
    let (order, ppe, tol, method) =
        (run.opts().smooth_order, run.panel_override(&geometry), run.opts().tol, Method::from(run.opts().method));
    let sys = run.timed("assembly", || assemble(&geometry.mesh, &rule, order, ppe))?;
    let sources = default_sources(&geometry.mesh, SOURCES_PER_REGION);
    let (rhs_d, rhs_n) = manufactured_rhs(&geometry.mesh, &sys, &sources)?;
    let t = Instant::now();
    let (sigma, rep) = solve_dirichlet(&sys, &rhs_d, method, tol)?;
    run.reports.push(ReportRecord::new("dirichlet", &rep, t.elapsed()));
    let t = Instant::now();
    let (rho, rep) = solve_neumann_transpose(&sys, &rhs_n, method, tol)?;
    run.reports.push(ReportRecord::new("neumann", &rep, t.elapsed()));
    let solve_time: f64 = run.reports.iter().map(|r| r.elapsed_s).sum();
    run.timings.insert("solve".into(), solve_time);
    Ok(Solved { geometry, sys, sources, sigma, rho })
}

#[derive(Serialize)]
struct DensityRow {
    edge: usize,
    x: f64,
    y: f64,
    weight: f64,
    sigma: f64,
    rho: f64,
}

fn solve(run: &mut Run) -> CliResult<serde_json::Value> {
    let s = solve_manufactured(run)?;
    let rows: Vec<DensityRow> = (0..s.sys.n())
        .map(|p| {
            let sw = s.sys.weights[p].sqrt();
            DensityRow {
                edge: s.sys.edge_of(p),
                x: s.sys.nodes[p].x,
                y: s.sys.nodes[p].y,
                weight: s.sys.weights[p],
                sigma: s.sigma[p] / sw,
                rho: s.rho[p] / sw,
            }
        })
        .collect();
    run.write_csv("densities.csv", &rows)?;
    Ok(json!({
        "geometry": s.geometry.source,
        "dof": s.sys.n(),
        "junctions": s.geometry.mesh.junctions.len(),
        "corners": s.geometry.mesh.corners.len(),
    }))
}

#[derive(Serialize)]
struct ErrorRow {
    x: f64,
    y: f64,
    region: usize,
    abs_err: f64,
}

fn verify(run: &mut Run) -> CliResult<serde_json::Value> {
    let s = solve_manufactured(run)?;
    let rule = run.rule(BETA_MAX, RULE_TOL)?;
    let grid = run.opts().grid.unwrap_or(50);
    let sol = FieldSolution::new(&s.geometry.mesh, &s.sys, &rule, s.sigma, s.rho)?;
    let (samples, skipped) = run.timed("evaluation", || manufactured_errors(&sol, &s.sources, grid))?;
    let (per_region, max_err) = summarize_errors(&s.geometry.mesh, &samples);
    let rows: Vec<ErrorRow> =
        samples.iter().map(|e| ErrorRow { x: e.x, y: e.y, region: e.region, abs_err: e.abs_err }).collect();
    run.write_csv("error_map.csv", &rows)?;
    let regions: Vec<_> =
        per_region.iter().map(|&(id, err, count)| json!({ "region": id, "max_err": err, "targets": count })).collect();
    Ok(json!({
        "geometry": s.geometry.source,
        "dof": s.sys.n(),
        "max_err": max_err,
        "threshold": VERIFY_TOL,
        "passed": max_err <= VERIFY_TOL,
        "per_region": regions,
        "targets": samples.len(),
        "skipped_near_boundary": skipped,
        "iterations": { "dirichlet": run.reports[0].iterations, "neumann": run.reports[1].iterations },
    }))
}

#[derive(Serialize)]
struct ScanRecord {
    a: f64,
    b: f64,
    i: usize,
    j: usize,
    beta: f64,
    res_dir: f64,
    res_neu: f64,
    degenerate: bool,
}

/// Default junction angles of the exponent scans: π/√2 and π/√3.
pub fn default_theta() -> [f64; 2] {
    [PI / 2f64.sqrt(), PI / 3f64.sqrt()]
}

fn exponents(run: &mut Run, limit: f64, branch: Option<usize>, name: &str) -> CliResult<serde_json::Value> {
    let theta = run.opts().theta.as_ref().map_or(default_theta(), |t| [t[0], t[1]]);
    let grid = run.opts().grid.unwrap_or(21);
    let n = branch.map_or(run.opts().n, |i| i.max(run.opts().n));
    let angles = [theta[0], theta[1], TWO_PI - theta[0] - theta[1]];
    let axis = linspace(-limit, limit, grid);
    JunctionParams::new(angles, 0.0, 0.0)?;
    let rows: Vec<Vec<ScanRecord>> = run.timed("scan", || {
        axis.par_iter()
            .map(|&a| {
                let mut out = Vec::new();
                for &b in &axis {
                    let p = JunctionParams::new(angles, a, b).expect("angles validated");
                    for br in find_branches(&p, n) {
                        if branch.is_some_and(|i| br.i != i) {
                            continue;
                        }
                        let degenerate = br.degenerate || br.failure.is_some();
                        out.push(ScanRecord { a, b, i: br.i, j: br.j, beta: br.beta, res_dir: br.res_dir, res_neu: br.res_neu, degenerate });
                    }
                }
                out
            })
            .collect()
    });
    let rows: Vec<ScanRecord> = rows.into_iter().flatten().collect();
    run.write_csv(name, &rows)?;
    let flagged = rows.iter().filter(|r| r.degenerate).count();
    Ok(json!({
        "theta": theta,
        "grid": grid,
        "limit": limit,
        "rows": rows.len(),
        "flagged": flagged,
    }))
}

#[derive(Serialize)]
struct RuleRow {
    j: usize,
    node: f64,
    weight: f64,
}

fn corner_rule(run: &mut Run, beta_max: f64, tol: f64) -> CliResult<serde_json::Value> {
    let rule = run.rule(beta_max, tol)?;
    let rows: Vec<RuleRow> =
        rule.nodes.iter().zip(&rule.weights).enumerate().map(|(j, (&node, &weight))| RuleRow { j, node, weight }).collect();
    run.write_csv("corner_rule.csv", &rows)?;
    let path = run.rule_path();
    let cached = run.rule.as_ref().expect("rule loaded");
    Ok(json!({
        "path": path,
        "hash": cached.hash,
        "built": cached.built,
        "k": rule.k(),
        "weight_sum": rule.weights.iter().sum::<f64>(),
        "cond_v": rule.cond_v,
        "max_quad_error": rule.max_quad_error,
        "max_interp_error": rule.max_interp_error,
    }))
}

#[derive(Serialize)]
struct AbRow {
    a: f64,
    b: f64,
    cond: Option<f64>,
}

fn sweep_ab(run: &mut Run) -> CliResult<serde_json::Value> {
    let rule = run.rule(BETA_MAX, RULE_TOL)?;
    let (grid, panels, order) = (run.opts().grid.unwrap_or(21), run.panels(), run.opts().smooth_order);
    let mesh = ab_template(ab_media(0.0, 0.0, AB_MU, AB_NU3), panels)?;
    let base = run.timed("assembly", || assemble(&mesh, &rule, order, None))?;
    let axis = ab_axis(grid);
    let points: Vec<(f64, f64)> = axis.iter().flat_map(|&a| axis.iter().map(move |&b| (a, b))).collect();
    let swept = run.timed("sweep", || {
        points.par_iter().map(|&(a, b)| ab_point(&base, a, b, AB_MU, AB_NU3, panels)).collect::<Vec<_>>()
    });
    let rows: Vec<AbRow> = swept.iter().map(|p| AbRow { a: p.a, b: p.b, cond: p.cond }).collect();
    run.write_csv("sweep_ab.csv", &rows)?;
    let notes: Vec<_> = swept.iter().filter_map(|p| p.note.as_ref().map(|n| json!({ "a": p.a, "b": p.b, "note": n }))).collect();
    let max = swept.iter().filter_map(|p| p.cond).fold(0.0, f64::max);
    Ok(json!({ "dof": base.n(), "grid": grid, "mu": AB_MU, "nu3": AB_NU3, "max_cond": max, "notes": notes }))
}

#[derive(Serialize)]
struct AngleRow {
    theta1: f64,
    theta2: f64,
    region: &'static str,
    cond: Option<f64>,
}

fn sweep_angles(run: &mut Run) -> CliResult<serde_json::Value> {
    let rule = run.rule(BETA_MAX, RULE_TOL)?;
    let (grid, panels, order) = (run.opts().grid.unwrap_or(21), run.panels(), run.opts().smooth_order);
    let axis = angle_axis(grid);
    let points: Vec<(f64, f64)> = axis.iter().flat_map(|&a| axis.iter().map(move |&b| (a, b))).collect();
    let swept = run.timed("sweep", || {
        points.par_iter().map(|&(t1, t2)| angle_point(&rule, t1, t2, ANGLE_MEDIA, panels, order)).collect::<Vec<_>>()
    });
    let rows: Vec<AngleRow> =
        swept.iter().map(|p| AngleRow { theta1: p.theta1, theta2: p.theta2, region: p.region.as_str(), cond: p.cond }).collect();
    run.write_csv("sweep_angles.csv", &rows)?;
    let flags: Vec<_> = swept
        .iter()
        .filter_map(|p| p.flag.as_ref().map(|f| json!({ "theta1": p.theta1, "theta2": p.theta2, "flag": f })))
        .collect();
    let max = swept.iter().filter_map(|p| p.cond).fold(0.0, f64::max);
    Ok(json!({ "grid": grid, "media": ANGLE_MEDIA, "max_cond": max, "flags": flags }))
}

#[derive(Serialize)]
struct PolarizationRow {
    #[serde(rename = "P11")]
    p11: f64,
    #[serde(rename = "P12")]
    p12: f64,
    #[serde(rename = "P21")]
    p21: f64,
    #[serde(rename = "P22")]
    p22: f64,
    iterations: usize,
}

fn polarization(run: &mut Run) -> CliResult<serde_json::Value> {
    let rule = run.rule(BETA_MAX, RULE_TOL)?;
    let geometry = run.geometry("builtin:lattice")?;
    let (order, ppe, tol, method) =
        (run.opts().smooth_order, run.panel_override(&geometry), run.opts().tol, Method::from(run.opts().method));
    let sys = run.timed("assembly", || assemble(&geometry.mesh, &rule, order, ppe))?;
    let mut p = [[0.0; 2]; 2];
    let mut charge = [0.0; 2];
    for d in 0..2 {
        let rhs = polarization_rhs(&geometry.mesh, &sys, d)?;
        let t = Instant::now();
        let (rho, rep) = solve_neumann_transpose(&sys, &rhs, method, tol)?;
        run.reports.push(ReportRecord::new(["x", "y"][d], &rep, t.elapsed()));
        (p[d], charge[d]) = density_moments(&sys, &rho);
    }
    let solve_time: f64 = run.reports.iter().map(|r| r.elapsed_s).sum();
    run.timings.insert("solve".into(), solve_time);
    let iterations = run.reports.iter().map(|r| r.iterations).sum();
    let row = PolarizationRow { p11: p[0][0], p12: p[0][1], p21: p[1][0], p22: p[1][1], iterations };
    run.write_csv("polarization.csv", &[row])?;
    let lattice = geometry.lattice.as_ref().map(|l| {
        json!({ "perturbation": l.perturbation, "attempts": l.attempts, "epsilon": l.epsilon, "cells": l.epsilon.len() })
    });
    Ok(json!({
        "geometry": geometry.source,
        "dof": sys.n(),
        "P": p,
        "asymmetry": (p[0][1] - p[1][0]).abs(),
        "charge": charge,
        "lattice": lattice,
    }))
}

/// Read the CSV written by a command back as records of strings.
pub fn read_csv(path: &Path) -> CliResult<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.map(|r| r.iter().map(String::from).collect())).collect::<Result<_, _>>()?;
    Ok((header, rows))
}
