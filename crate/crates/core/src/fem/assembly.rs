use rayon::prelude::*;

use super::element::{ElementLoads, ElementMatrix, HexQuadrature};
use super::mesh::PeriodicMesh;
use super::sparse::CsrMatrix;
use crate::error::{Error, Result};
use crate::microstructure::VoxelRVE;

/// Periodic corrector system over master DOFs `3 * slot + component`.
///
/// Anchor rows and columns are decoupled (diagonal kept, off-diagonals and
/// right-hand sides zeroed), which pins the anchor to zero.
#[derive(Clone, Debug)]
pub struct LinearSystem {
    pub matrix: CsrMatrix,
    /// One right-hand side per load case, Voigt order (11, 22, 33, 23, 13, 12).
    pub rhs: [Vec<f64>; 6],
    pub constrained_dofs: [usize; 3],
}

/// Element matrices and loads per material, for the uniform voxel size.
pub(crate) struct ElementLibrary {
    pub quadrature: HexQuadrature,
    pub stiffness: Vec<ElementMatrix>,
    pub loads: Vec<ElementLoads>,
}

impl ElementLibrary {
    pub fn new(rve: &VoxelRVE) -> Self {
        let quadrature = HexQuadrature::new(rve.voxel_size());
        let stiffness = rve.stiffness_table().iter().map(|d| quadrature.stiffness(d)).collect();
        let loads = rve.stiffness_table().iter().map(|d| quadrature.loads(d)).collect();
        Self {
            quadrature,
            stiffness,
            loads,
        }
    }
}

/// Assembles the six periodic corrector problems on `mesh`.
pub fn assemble(rve: &VoxelRVE, mesh: &PeriodicMesh) -> Result<LinearSystem> {
    if rve.dims() != mesh.dims() {
        return Err(Error::InvalidArgument(format!(
            "mesh dims {:?} do not match RVE dims {:?}",
            mesh.dims(),
            rve.dims()
        )));
    }
    let lib = ElementLibrary::new(rve);
    let n_slots = mesh.num_masters();
    let n_elem = mesh.num_elements();

    // Incidence: for each master slot, the (element, local corner) pairs touching it.
    let mut incidence: Vec<Vec<(u32, u8)>> = vec![Vec::with_capacity(8); n_slots];
    for e in 0..n_elem {
        for (a, s) in mesh.element_slots(e).into_iter().enumerate() {
            incidence[s].push((e as u32, a as u8));
        }
    }

    let ids = rve.material_ids();
    let anchor = mesh.anchor_slot();

    // Block rows, assembled independently per slot in a fixed order.
    let block_rows: Vec<(Vec<usize>, Vec<[[f64; 3]; 3]>, [[f64; 6]; 3])> = (0..n_slots)
        .into_par_iter()
        .map(|slot| {
            let mut cols: Vec<usize> = incidence[slot]
                .iter()
                .flat_map(|&(e, _)| mesh.element_slots(e as usize))
                .collect();
            cols.sort_unstable();
            cols.dedup();
            let mut blocks = vec![[[0.0; 3]; 3]; cols.len()];
            let mut rhs = [[0.0; 6]; 3];
            for &(e, a) in &incidence[slot] {
                let e = e as usize;
                let a = a as usize;
                let m = ids[e] as usize;
                let ke = &lib.stiffness[m];
                let fe = &lib.loads[m];
                for (b, s) in mesh.element_slots(e).into_iter().enumerate() {
                    let pos = cols.binary_search(&s).expect("column in pattern");
                    for i in 0..3 {
                        for j in 0..3 {
                            blocks[pos][i][j] += ke[(3 * a + i, 3 * b + j)];
                        }
                    }
                }
                for i in 0..3 {
                    for case in 0..6 {
                        rhs[i][case] += fe[(3 * a + i, case)];
                    }
                }
            }
            if slot == anchor {
                for (pos, &c) in cols.iter().enumerate() {
                    if c != slot {
                        blocks[pos] = [[0.0; 3]; 3];
                    } else {
                        for i in 0..3 {
                            for j in 0..3 {
                                if i != j {
                                    blocks[pos][i][j] = 0.0;
                                }
                            }
                        }
                    }
                }
                rhs = [[0.0; 6]; 3];
            } else if let Ok(pos) = cols.binary_search(&anchor) {
                blocks[pos] = [[0.0; 3]; 3];
            }
            (cols, blocks, rhs)
        })
        .collect();

    let ndof = 3 * n_slots;
    let nnz: usize = block_rows.iter().map(|(c, _, _)| 9 * c.len()).sum();
    let mut row_ptr = Vec::with_capacity(ndof + 1);
    let mut col_idx = Vec::with_capacity(nnz);
    let mut values = Vec::with_capacity(nnz);
    let mut rhs: [Vec<f64>; 6] = std::array::from_fn(|_| vec![0.0; ndof]);
    row_ptr.push(0);
    for (slot, (cols, blocks, f)) in block_rows.iter().enumerate() {
        for i in 0..3 {
            for (&c, block) in cols.iter().zip(blocks) {
                for j in 0..3 {
                    col_idx.push(3 * c + j);
                    values.push(block[i][j]);
                }
            }
            row_ptr.push(col_idx.len());
            for case in 0..6 {
                rhs[case][3 * slot + i] = f[i][case];
            }
        }
    }
    let matrix = CsrMatrix {
        nrows: ndof,
        row_ptr,
        col_idx,
        values,
    };
    if let Some(d) = (0..ndof).map(|i| matrix.get(i, i)).find(|d| !(*d > 0.0)) {
        return Err(Error::SingularSystem(format!("non-positive diagonal {d} after constraints")));
    }
    Ok(LinearSystem {
        matrix,
        rhs,
        constrained_dofs: [3 * anchor, 3 * anchor + 1, 3 * anchor + 2],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::microstructure::{stiffness_from_engineering, TransverseIsotropicMaterial};

    fn iso(e: f64) -> crate::voigt::Mat6 {
        stiffness_from_engineering(&TransverseIsotropicMaterial::isotropic(e, 0.3)).unwrap()
    }

    #[test]
    fn homogeneous_cell_has_vanishing_loads() {
        let rve = VoxelRVE::homogeneous([5, 4, 6], [1.0, 0.7, 1.3], iso(3.0)).unwrap();
        let sys = assemble(&rve, &super::super::mesh::build_mesh(&rve)).unwrap();
        let scale = iso(3.0).norm();
        for f in &sys.rhs {
            assert!(f.iter().all(|v| v.abs() <= 1e-13 * scale));
        }
    }

    #[test]
    fn system_matrix_is_symmetric() {
        let rve = VoxelRVE::laminate([3, 4, 6], [1.0, 2.0, 1.5], iso(10.0), iso(1.0), 0.5).unwrap();
        let sys = assemble(&rve, &super::super::mesh::build_mesh(&rve)).unwrap();
        assert!(sys.matrix.relative_asymmetry() <= 1e-12);
    }

    #[test]
    fn laminate_loads_live_on_interfaces() {
        let (n1, n2, n3) = (3, 3, 8);
        let rve = VoxelRVE::laminate([n1, n2, n3], [1.0; 3], iso(10.0), iso(1.0), 0.5).unwrap();
        let mesh = super::super::mesh::build_mesh(&rve);
        let sys = assemble(&rve, &mesh).unwrap();
        let scale = iso(10.0).norm();
        for slot in 0..mesh.num_masters() {
            let k = slot / (n1 * n2);
            let on_interface = k == 0 || k == n3 / 2;
            let magnitude: f64 = (0..3)
                .flat_map(|c| sys.rhs.iter().map(move |f| f[3 * slot + c].abs()))
                .fold(0.0, f64::max);
            if on_interface && slot != mesh.anchor_slot() {
                assert!(magnitude > 1e-3 * scale, "slot {slot} has no interface load");
            } else {
                assert!(magnitude <= 1e-13 * scale, "slot {slot} load {magnitude}");
            }
        }
    }

    #[test]
    fn brute_force_dense_assembly_agrees() {
        // Dense global assembly over all nodes, followed by explicit folding of
        // slave rows/columns onto masters.
        let rve = VoxelRVE::laminate([2, 3, 4], [1.0, 1.5, 2.0], iso(5.0), iso(2.0), 0.5).unwrap();
        let mesh = super::super::mesh::build_mesh(&rve);
        let sys = assemble(&rve, &mesh).unwrap();
        let quad = HexQuadrature::new(rve.voxel_size());
        let nn = mesh.num_nodes();
        let mut k_full = vec![vec![0.0; 3 * nn]; 3 * nn];
        for e in 0..mesh.num_elements() {
            let ke = quad.stiffness(rve.stiffness_of(e));
            let nodes = mesh.element_nodes(e);
            for a in 0..8 {
                for b in 0..8 {
                    for i in 0..3 {
                        for j in 0..3 {
                            k_full[3 * nodes[a] + i][3 * nodes[b] + j] += ke[(3 * a + i, 3 * b + j)];
                        }
                    }
                }
            }
        }
        let ndof = 3 * mesh.num_masters();
        let mut k_red = vec![vec![0.0; ndof]; ndof];
        for p in 0..3 * nn {
            for q in 0..3 * nn {
                let rp = 3 * mesh.slot_of(p / 3) + p % 3;
                let rq = 3 * mesh.slot_of(q / 3) + q % 3;
                k_red[rp][rq] += k_full[p][q];
            }
        }
        let anchor: Vec<usize> = sys.constrained_dofs.to_vec();
        for i in 0..ndof {
            for j in 0..ndof {
                let expected = if anchor.contains(&i) || anchor.contains(&j) {
                    if i == j {
                        k_red[i][j]
                    } else {
                        0.0
                    }
                } else {
                    k_red[i][j]
                };
                assert!((sys.matrix.get(i, j) - expected).abs() < 1e-12, "({i},{j})");
            }
        }
    }
}
