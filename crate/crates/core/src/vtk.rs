//! Legacy ASCII VTK output. Floats are written with 9 significant digits.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::fem::CorrectorSolution;
use crate::microstructure::VoxelRVE;
use crate::voigt::CASE_LABELS;

const VTK_HEXAHEDRON: u8 = 12;

fn fmt(v: f64) -> String {
    format!("{v:.8e}")
}

/// Material field as structured points with `material_id` cell scalars.
pub fn write_material<W: Write>(rve: &VoxelRVE, out: &mut W) -> std::io::Result<()> {
    let [n1, n2, n3] = rve.dims();
    let h = rve.voxel_size();
    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "voxel material field")?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET STRUCTURED_POINTS")?;
    writeln!(out, "DIMENSIONS {} {} {}", n1 + 1, n2 + 1, n3 + 1)?;
    writeln!(out, "ORIGIN 0 0 0")?;
    writeln!(out, "SPACING {} {} {}", fmt(h[0]), fmt(h[1]), fmt(h[2]))?;
    writeln!(out, "CELL_DATA {}", rve.num_voxels())?;
    writeln!(out, "SCALARS material_id int 1")?;
    writeln!(out, "LOOKUP_TABLE default")?;
    for chunk in rve.material_ids().chunks(16) {
        let line: Vec<String> = chunk.iter().map(|m| m.to_string()).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    Ok(())
}

/// One corrector case on the hexahedral mesh, as vector point data `chi_<case>`.
pub fn write_corrector<W: Write>(
    rve: &VoxelRVE,
    corr: &CorrectorSolution,
    case: usize,
    out: &mut W,
) -> std::io::Result<()> {
    let mesh = &corr.mesh;
    let n_nodes = mesh.num_nodes();
    let n_elem = mesh.num_elements();
    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "periodic corrector chi_{}", CASE_LABELS[case])?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(out, "POINTS {n_nodes} double")?;
    for n in 0..n_nodes {
        let p = mesh.node_coords(n);
        writeln!(out, "{} {} {}", fmt(p[0]), fmt(p[1]), fmt(p[2]))?;
    }
    writeln!(out, "CELLS {} {}", n_elem, 9 * n_elem)?;
    for e in 0..n_elem {
        let nodes = mesh.element_nodes(e);
        let line: Vec<String> = nodes.iter().map(|n| n.to_string()).collect();
        writeln!(out, "8 {}", line.join(" "))?;
    }
    writeln!(out, "CELL_TYPES {n_elem}")?;
    for _ in 0..n_elem {
        writeln!(out, "{VTK_HEXAHEDRON}")?;
    }
    writeln!(out, "CELL_DATA {n_elem}")?;
    writeln!(out, "SCALARS material_id int 1")?;
    writeln!(out, "LOOKUP_TABLE default")?;
    for m in rve.material_ids() {
        writeln!(out, "{m}")?;
    }
    writeln!(out, "POINT_DATA {n_nodes}")?;
    writeln!(out, "VECTORS chi_{} double", CASE_LABELS[case])?;
    for v in &corr.fields[case] {
        writeln!(out, "{} {} {}", fmt(v[0]), fmt(v[1]), fmt(v[2]))?;
    }
    Ok(())
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    f(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

/// Writes `material.vtk` and `chi_11.vtk` … `chi_12.vtk` into `dir`.
/// Returns the written paths.
pub fn export_all(rve: &VoxelRVE, corr: &CorrectorSolution, dir: &Path) -> Result<Vec<std::path::PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    let path = dir.join("material.vtk");
    write_file(&path, |w| write_material(rve, w))?;
    written.push(path);
    for (case, label) in CASE_LABELS.iter().enumerate() {
        let path = dir.join(format!("chi_{label}.vtk"));
        write_file(&path, |w| write_corrector(rve, corr, case, w))?;
        written.push(path);
    }
    Ok(written)
}
