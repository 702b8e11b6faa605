//! Trilinear hexahedron on an axis-aligned box, 2×2×2 Gauss quadrature.

use nalgebra::{SMatrix, SVector};

use super::mesh::HEX_CORNERS;
use crate::voigt::Mat6;

pub type StrainMatrix = SMatrix<f64, 6, 24>;
pub type ElementMatrix = SMatrix<f64, 24, 24>;
/// One column per corrector load case.
pub type ElementLoads = SMatrix<f64, 24, 6>;
pub type ElementDofs = SVector<f64, 24>;

/// Strain–displacement matrices at the Gauss points of a box element.
#[derive(Clone, Debug)]
pub struct HexQuadrature {
    pub strain: [StrainMatrix; 8],
    /// Quadrature average of the strain matrices (equals the centroid value).
    pub mean_strain: StrainMatrix,
    /// Weight × Jacobian determinant, identical for every point.
    pub weight: f64,
    pub volume: f64,
}

impl HexQuadrature {
    pub fn new(h: [f64; 3]) -> Self {
        let g = 1.0 / 3f64.sqrt();
        let mut strain = [StrainMatrix::zeros(); 8];
        for (q, corner) in HEX_CORNERS.iter().enumerate() {
            let xi = corner.map(|c| if c == 0 { -g } else { g });
            strain[q] = strain_matrix(xi, h);
        }
        let mean_strain = strain.iter().fold(StrainMatrix::zeros(), |acc, b| acc + b) / 8.0;
        let volume = h[0] * h[1] * h[2];
        Self {
            strain,
            mean_strain,
            weight: volume / 8.0,
            volume,
        }
    }

    pub fn stiffness(&self, d: &Mat6) -> ElementMatrix {
        let mut k = ElementMatrix::zeros();
        for b in &self.strain {
            k += b.transpose() * d * b * self.weight;
        }
        (k + k.transpose()) * 0.5
    }

    /// `∫ Bᵀ D dV`: load vectors of the six unit macro strains.
    pub fn loads(&self, d: &Mat6) -> ElementLoads {
        self.strain
            .iter()
            .fold(ElementLoads::zeros(), |acc, b| acc + b.transpose() * d * self.weight)
    }
}

fn strain_matrix(xi: [f64; 3], h: [f64; 3]) -> StrainMatrix {
    let mut b = StrainMatrix::zeros();
    for (a, corner) in HEX_CORNERS.iter().enumerate() {
        let s = corner.map(|c| if c == 0 { -1.0 } else { 1.0 });
        let f = [0, 1, 2].map(|d| 1.0 + s[d] * xi[d]);
        let grad = [
            0.125 * s[0] * f[1] * f[2] * 2.0 / h[0],
            0.125 * f[0] * s[1] * f[2] * 2.0 / h[1],
            0.125 * f[0] * f[1] * s[2] * 2.0 / h[2],
        ];
        let c = 3 * a;
        b[(0, c)] = grad[0];
        b[(1, c + 1)] = grad[1];
        b[(2, c + 2)] = grad[2];
        b[(3, c + 1)] = grad[2];
        b[(3, c + 2)] = grad[1];
        b[(4, c)] = grad[2];
        b[(4, c + 2)] = grad[0];
        b[(5, c)] = grad[1];
        b[(5, c + 1)] = grad[0];
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::SymmetricEigen;

    #[test]
    fn linear_field_gives_exact_strain() {
        let h = [0.5, 1.5, 0.25];
        let quad = HexQuadrature::new(h);
        // u = G x with an arbitrary gradient.
        let g = [[0.1, 0.2, -0.3], [0.05, -0.4, 0.7], [0.3, 0.0, 0.25]];
        let mut u = ElementDofs::zeros();
        for (a, corner) in HEX_CORNERS.iter().enumerate() {
            let x = [0, 1, 2].map(|d| corner[d] as f64 * h[d]);
            for i in 0..3 {
                u[3 * a + i] = (0..3).map(|j| g[i][j] * x[j]).sum();
            }
        }
        let expected = [
            g[0][0],
            g[1][1],
            g[2][2],
            g[1][2] + g[2][1],
            g[0][2] + g[2][0],
            g[0][1] + g[1][0],
        ];
        for b in &quad.strain {
            let e = b * u;
            for i in 0..6 {
                assert!((e[i] - expected[i]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn stiffness_has_six_rigid_modes() {
        let quad = HexQuadrature::new([1.0, 2.0, 0.5]);
        let k = quad.stiffness(&Mat6::identity());
        let ev = SymmetricEigen::new(k).eigenvalues;
        let zero = ev.iter().filter(|v| v.abs() < 1e-12).count();
        assert_eq!(zero, 6);
        assert!(ev.iter().all(|&v| v > -1e-12));
    }

    #[test]
    fn loads_sum_to_zero_over_corners() {
        let quad = HexQuadrature::new([1.0, 1.0, 1.0]);
        let f = quad.loads(&Mat6::identity());
        for case in 0..6 {
            for comp in 0..3 {
                let s: f64 = (0..8).map(|a| f[(3 * a + comp, case)]).sum();
                assert!(s.abs() < 1e-14);
            }
        }
    }
}
