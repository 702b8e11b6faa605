use crate::error::{Error, Result};

/// Local corner offsets of the trilinear hexahedron, in standard order.
pub const HEX_CORNERS: [[usize; 3]; 8] = [
    [0, 0, 0],
    [1, 0, 0],
    [1, 1, 0],
    [0, 1, 0],
    [0, 0, 1],
    [1, 0, 1],
    [1, 1, 1],
    [0, 1, 1],
];

/// Node grid of a voxel cell with periodic master–slave pairing.
///
/// Node `(i, j, k)` on the `(n1+1) × (n2+1) × (n3+1)` grid is a master when
/// `i < n1 && j < n2 && k < n3`; every other node is slaved to the master at
/// `(i mod n1, j mod n2, k mod n3)`. Masters are also numbered compactly by
/// their *slot* `i + n1 (j + n2 k)`, which equals the voxel index.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicMesh {
    dims: [usize; 3],
    cell_lengths: [f64; 3],
    master_of: Vec<usize>,
    slot_of: Vec<usize>,
    anchor: usize,
}

impl PeriodicMesh {
    pub fn new(dims: [usize; 3], cell_lengths: [f64; 3]) -> Self {
        let [n1, n2, n3] = dims;
        let num_nodes = (n1 + 1) * (n2 + 1) * (n3 + 1);
        let mut master_of = Vec::with_capacity(num_nodes);
        let mut slot_of = Vec::with_capacity(num_nodes);
        for k in 0..=n3 {
            for j in 0..=n2 {
                for i in 0..=n1 {
                    let (mi, mj, mk) = (i % n1, j % n2, k % n3);
                    master_of.push(mi + (n1 + 1) * (mj + (n2 + 1) * mk));
                    slot_of.push(mi + n1 * (mj + n2 * mk));
                }
            }
        }
        Self {
            dims,
            cell_lengths,
            master_of,
            slot_of,
            anchor: 0,
        }
    }

    /// Moves the zero-displacement anchor to another master node.
    pub fn with_anchor(mut self, node: usize) -> Result<Self> {
        if node >= self.num_nodes() || self.master_of[node] != node {
            return Err(Error::InvalidArgument(format!("anchor node {node} is not a master node")));
        }
        self.anchor = node;
        Ok(self)
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn cell_lengths(&self) -> [f64; 3] {
        self.cell_lengths
    }

    pub fn element_size(&self) -> [f64; 3] {
        [0, 1, 2].map(|a| self.cell_lengths[a] / self.dims[a] as f64)
    }

    pub fn num_nodes(&self) -> usize {
        self.master_of.len()
    }

    pub fn num_elements(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn num_masters(&self) -> usize {
        self.num_elements()
    }

    /// Free DOFs after periodic elimination and the anchor constraint.
    pub fn num_free_dofs(&self) -> usize {
        3 * self.num_masters() - 3
    }

    pub fn anchor(&self) -> usize {
        self.anchor
    }

    pub fn anchor_slot(&self) -> usize {
        self.slot_of[self.anchor]
    }

    pub fn node_index(&self, i: usize, j: usize, k: usize) -> usize {
        let [n1, n2, _] = self.dims;
        i + (n1 + 1) * (j + (n2 + 1) * k)
    }

    pub fn node_coords(&self, node: usize) -> [f64; 3] {
        let [n1, n2, _] = self.dims;
        let h = self.element_size();
        let i = node % (n1 + 1);
        let j = (node / (n1 + 1)) % (n2 + 1);
        let k = node / ((n1 + 1) * (n2 + 1));
        [i as f64 * h[0], j as f64 * h[1], k as f64 * h[2]]
    }

    pub fn master_of(&self, node: usize) -> usize {
        self.master_of[node]
    }

    pub fn slot_of(&self, node: usize) -> usize {
        self.slot_of[node]
    }

    pub fn is_master(&self, node: usize) -> bool {
        self.master_of[node] == node
    }

    /// Master node carrying compact slot `slot`.
    pub fn node_index_of_slot(&self, slot: usize) -> usize {
        let [n1, n2, _] = self.dims;
        self.node_index(slot % n1, (slot / n1) % n2, slot / (n1 * n2))
    }

    /// Node indices of element `e` (voxel index ordering).
    pub fn element_nodes(&self, e: usize) -> [usize; 8] {
        let [n1, n2, _] = self.dims;
        let i = e % n1;
        let j = (e / n1) % n2;
        let k = e / (n1 * n2);
        HEX_CORNERS.map(|[di, dj, dk]| self.node_index(i + di, j + dj, k + dk))
    }

    /// Master slots of the corners of element `e`.
    pub fn element_slots(&self, e: usize) -> [usize; 8] {
        self.element_nodes(e).map(|n| self.slot_of[n])
    }
}

/// Builds the periodic mesh for a voxel cell (one hexahedron per voxel).
pub fn build_mesh(rve: &crate::microstructure::VoxelRVE) -> PeriodicMesh {
    PeriodicMesh::new(rve.dims(), rve.cell_lengths())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn single_voxel_has_one_master() {
        let mesh = PeriodicMesh::new([1, 1, 1], [1.0; 3]);
        assert_eq!(mesh.num_nodes(), 8);
        assert!((0..8).all(|n| mesh.master_of(n) == 0));
        assert_eq!(mesh.num_masters(), 1);
    }

    #[test]
    fn two_cubed_equivalence_classes_by_wrapping() {
        let mesh = PeriodicMesh::new([2, 2, 2], [1.0; 3]);
        assert_eq!(mesh.num_nodes(), 27);
        // Brute force: wrap physical coordinates into [0, 1) and count distinct images.
        let classes: BTreeSet<[i64; 3]> = (0..mesh.num_nodes())
            .map(|n| mesh.node_coords(n).map(|x| ((x.rem_euclid(1.0)) * 1000.0).round() as i64 % 1000))
            .collect();
        assert_eq!(classes.len(), 8);
        let masters: BTreeSet<usize> = (0..27).map(|n| mesh.master_of(n)).collect();
        assert_eq!(masters.len(), 8);
        assert_eq!(mesh.num_free_dofs(), 3 * 8 - 3);
        for n in 0..27 {
            let c = mesh.node_coords(n).map(|x| x.rem_euclid(1.0));
            let m = mesh.node_coords(mesh.master_of(n));
            for a in 0..3 {
                assert!((c[a] - m[a]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn master_map_is_idempotent() {
        for dims in [[1, 2, 3], [4, 4, 4], [5, 2, 7]] {
            let mesh = PeriodicMesh::new(dims, [1.0, 2.0, 3.0]);
            for n in 0..mesh.num_nodes() {
                let m = mesh.master_of(n);
                assert_eq!(mesh.master_of(m), m);
                assert_eq!(mesh.slot_of(m), mesh.slot_of(n));
            }
        }
    }

    #[test]
    fn anchor_must_be_master() {
        let mesh = PeriodicMesh::new([3, 3, 3], [1.0; 3]);
        let slave = mesh.node_index(3, 0, 0);
        assert!(mesh.clone().with_anchor(slave).is_err());
        let master = mesh.node_index(1, 2, 0);
        assert_eq!(mesh.with_anchor(master).unwrap().anchor(), master);
    }
}
