//! JSON geometry files and the bundled geometries.
//!
//! A file has three arrays: `vertices` as `[x, y]` pairs, `regions` as
//! `{id, mu, nu}` (id 0 is the exterior and must be present) and `edges` as
//! `{v_start, v_end, left, right, panels}`. The edge normal points into the
//! right region.

use serde::{Deserialize, Serialize};
use std::path::Path;

use trijunction::geometry::{CompositeMesh, EdgeInput, Region, Vec2};
use trijunction::postproc::templates::{diamond, hex_lattice, two_triangle, Lattice, DIAMOND_MEDIA, TWO_TRIANGLE_MEDIA};

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionRecord {
    pub id: usize,
    pub mu: f64,
    pub nu: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRecord {
    pub v_start: usize,
    pub v_end: usize,
    pub left: usize,
    pub right: usize,
    pub panels: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryFile {
    pub vertices: Vec<[f64; 2]>,
    pub regions: Vec<RegionRecord>,
    pub edges: Vec<EdgeRecord>,
}

impl GeometryFile {
    pub fn from_mesh(mesh: &CompositeMesh) -> Self {
        GeometryFile {
            vertices: mesh.vertices.iter().map(|v| [v.x, v.y]).collect(),
            regions: mesh.regions.iter().map(|r| RegionRecord { id: r.id, mu: r.mu, nu: r.nu }).collect(),
            edges: mesh
                .edges
                .iter()
                .map(|e| EdgeRecord {
                    v_start: e.v_start,
                    v_end: e.v_end,
                    left: e.left_region,
                    right: e.right_region,
                    panels: e.panels_per_edge,
                })
                .collect(),
        }
    }

    pub fn to_mesh(&self) -> CliResult<CompositeMesh> {
        let vertices = self.vertices.iter().map(|p| Vec2::new(p[0], p[1])).collect();
        let regions = self.regions.iter().map(|r| Region { id: r.id, mu: r.mu, nu: r.nu }).collect();
        let edges: Vec<EdgeInput> = self
            .edges
            .iter()
            .map(|e| EdgeInput { v_start: e.v_start, v_end: e.v_end, left: e.left, right: e.right, panels: e.panels })
            .collect();
        Ok(CompositeMesh::new(vertices, regions, &edges)?)
    }
}

pub fn parse_geometry(text: &str) -> CliResult<CompositeMesh> {
    let file: GeometryFile =
        serde_json::from_str(text).map_err(|e| CliError::new("parse", "parse_geometry", e.to_string()))?;
    file.to_mesh()
}

pub fn write_geometry(mesh: &CompositeMesh) -> String {
    serde_json::to_string_pretty(&GeometryFile::from_mesh(mesh)).expect("geometry serializes")
}

pub const TWO_TRIANGLE_JSON: &str = include_str!("../geometries/two_triangle.json");
pub const DIAMOND_JSON: &str = include_str!("../geometries/diamond.json");

/// Options of the lattice generator used by `builtin:lattice`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatticeOptions {
    pub cells_across: usize,
    pub perturbation: f64,
    pub seed: u64,
    pub panels: usize,
}

/// A loaded geometry, with the generator output when it came from the
/// lattice passthrough.
#[derive(Clone, Debug)]
pub struct LoadedGeometry {
    pub mesh: CompositeMesh,
    pub lattice: Option<Lattice>,
    pub source: String,
}

/// `builtin:two-triangle`, `builtin:diamond`, `builtin:lattice` or a path to
/// a JSON file. Bundled meshes use `panels` on every edge.
pub fn load_geometry(spec: &str, panels: usize, lattice: LatticeOptions) -> CliResult<LoadedGeometry> {
    let loaded = |mesh| Ok(LoadedGeometry { mesh, lattice: None, source: spec.to_string() });
    match spec {
        "builtin:two-triangle" => loaded(two_triangle((1.0, 1.0), TWO_TRIANGLE_MEDIA, panels)?),
        "builtin:diamond" => loaded(diamond((1.0, 1.0), DIAMOND_MEDIA, panels)?),
        "builtin:lattice" => {
            let lat = hex_lattice(lattice.cells_across, lattice.perturbation, (-1.0, 1.0), lattice.seed, lattice.panels)?;
            Ok(LoadedGeometry { mesh: lat.mesh.clone(), lattice: Some(lat), source: spec.to_string() })
        }
        other if other.starts_with("builtin:") => Err(CliError::new(
            "validation",
            "load_geometry",
            format!("unknown bundled geometry {other}; expected two-triangle, diamond or lattice"),
        )),
        path => {
            let text = std::fs::read_to_string(Path::new(path))
                .map_err(|e| CliError::new("io", "load_geometry", format!("{path}: {e}")))?;
            loaded(parse_geometry(&text)?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_files_match_templates() {
        let t = two_triangle((1.0, 1.0), TWO_TRIANGLE_MEDIA, 3).unwrap();
        assert_eq!(parse_geometry(TWO_TRIANGLE_JSON).unwrap(), t);
        let d = diamond((1.0, 1.0), DIAMOND_MEDIA, 3).unwrap();
        assert_eq!(parse_geometry(DIAMOND_JSON).unwrap(), d);
    }

    #[test]
    fn round_trip() {
        let t = two_triangle((1.0, 1.0), TWO_TRIANGLE_MEDIA, 2).unwrap();
        assert_eq!(parse_geometry(&write_geometry(&t)).unwrap(), t);
    }

    #[test]
    fn rejects_bad_files() {
        let err = parse_geometry("{\"vertices\": [[0, 0]]").unwrap_err();
        assert_eq!(err.kind, "parse");
        let unknown = r#"{"vertices": [], "regions": [], "edges": [], "extra": 1}"#;
        assert_eq!(parse_geometry(unknown).unwrap_err().kind, "parse");
        let no_exterior = r#"{"vertices": [[0,0],[1,0]], "regions": [{"id": 1, "mu": 1, "nu": 1}], "edges": []}"#;
        let err = parse_geometry(no_exterior).unwrap_err();
        assert_eq!((err.kind.as_str(), err.op.as_str()), ("validation", "geometry"));
        let dangling = r#"{"vertices": [[0,0],[1,0]], "regions": [{"id": 0, "mu": 1, "nu": 1}, {"id": 1, "mu": 1, "nu": 2}],
            "edges": [{"v_start": 0, "v_end": 1, "left": 1, "right": 0, "panels": 2}]}"#;
        assert!(parse_geometry(dangling).unwrap_err().detail.contains("dangling"));
    }
}
