//! Periodic corrector problems on voxel meshes and the homogenized stiffness.

pub mod assembly;
pub mod corrector;
pub mod element;
pub mod mesh;
pub mod sparse;

pub use assembly::{assemble, LinearSystem};
pub use corrector::{
    homogenize, localization_operator, localize_stress, solve_correctors, CorrectorSolution,
    HomogenizedStiffness, LocalizationOperator,
};
pub use mesh::{build_mesh, PeriodicMesh};
pub use sparse::{CgOptions, CgReport};

use crate::error::Result;
use crate::microstructure::VoxelRVE;

/// Mesh, assemble, solve and homogenize in one call.
pub fn solve_rve(rve: &VoxelRVE, opts: &CgOptions) -> Result<(CorrectorSolution, HomogenizedStiffness)> {
    solve_rve_on(rve, build_mesh(rve), opts)
}

/// As [`solve_rve`] with a caller-provided mesh (e.g. another anchor).
pub fn solve_rve_on(
    rve: &VoxelRVE,
    mesh: PeriodicMesh,
    opts: &CgOptions,
) -> Result<(CorrectorSolution, HomogenizedStiffness)> {
    let sys = assemble(rve, &mesh)?;
    let corr = solve_correctors(&sys, &mesh, opts)?;
    let dh = homogenize(rve, &corr)?;
    Ok((corr, dh))
}
