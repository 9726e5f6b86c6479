use rayon::prelude::*;

use trijunction::cornerbasis::CornerRule;
use trijunction::discretize::{build_panels, check_angles, Assembler, NystromSystem};
use trijunction::geometry::CompositeMesh;

use crate::error::CliResult;

/// Panels and Dirichlet system of `mesh`, with the rows of the coupling
/// assembled in parallel. Identical to the serial assembly.
pub fn assemble(mesh: &CompositeMesh, rule: &CornerRule, order: usize, panels_per_edge: Option<usize>) -> CliResult<NystromSystem> {
    check_angles(mesh)?;
    let panels = build_panels(mesh, rule, order, panels_per_edge)?;
    let d_edge = (0..mesh.edges.len()).map(|e| mesh.edge_d(e)).collect();
    let asm = Assembler::new(&panels, d_edge, rule);
    let rows = (0..asm.n()).into_par_iter().map(|p| asm.coupling_row(p)).collect::<Result<Vec<_>, _>>()?;
    Ok(NystromSystem::from_rows(&asm, panels.clone(), rows))
}
