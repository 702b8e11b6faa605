//! Voigt-notation helpers.
//!
//! Ordering is (11, 22, 33, 23, 13, 12) throughout. Strain 6-vectors carry
//! engineering shears (γ = 2ε), so `σ = C ε` holds with a symmetric `C` and
//! `½ εᵀ C ε` is the strain energy density.

use nalgebra::{Matrix3, Matrix6, SymmetricEigen};

pub type Mat6 = Matrix6<f64>;

/// Tensor index pairs of each Voigt slot.
pub const VOIGT_PAIRS: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (1, 2), (0, 2), (0, 1)];

/// Labels of the six corrector load cases, in Voigt order.
pub const CASE_LABELS: [&str; 6] = ["11", "22", "33", "23", "13", "12"];

pub fn voigt_index(i: usize, j: usize) -> usize {
    match (i.min(j), i.max(j)) {
        (0, 0) => 0,
        (1, 1) => 1,
        (2, 2) => 2,
        (1, 2) => 3,
        (0, 2) => 4,
        (0, 1) => 5,
        _ => panic!("tensor index out of range: ({i}, {j})"),
    }
}

/// Stress transformation (Bond) matrix for the rotation `q`, so that
/// `σ' = M σ` for stress 6-vectors and `C' = M C Mᵀ` for stiffnesses.
pub fn bond_matrix(q: &Matrix3<f64>) -> Mat6 {
    let mut m = Mat6::zeros();
    for (row, &(i, j)) in VOIGT_PAIRS.iter().enumerate() {
        for (col, &(k, l)) in VOIGT_PAIRS.iter().enumerate() {
            m[(row, col)] = if k == l {
                q[(i, k)] * q[(j, k)]
            } else {
                q[(i, k)] * q[(j, l)] + q[(i, l)] * q[(j, k)]
            };
        }
    }
    m
}

/// Rotation by `angle_deg` degrees about axis 3.
pub fn rotation_about_3(angle_deg: f64) -> Matrix3<f64> {
    let (s, c) = angle_deg.to_radians().sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Mandel-scaled copy (shear rows and columns multiplied by √2), whose
/// eigenvalues are frame invariant.
pub fn to_mandel(c: &Mat6) -> Mat6 {
    let w = [1.0, 1.0, 1.0, 2f64.sqrt(), 2f64.sqrt(), 2f64.sqrt()];
    Mat6::from_fn(|i, j| c[(i, j)] * w[i] * w[j])
}

pub fn symmetric_eigenvalues(c: &Mat6) -> [f64; 6] {
    let sym = (c + c.transpose()) * 0.5;
    let mut ev: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev.try_into().unwrap()
}

pub fn is_positive_definite(c: &Mat6) -> bool {
    nalgebra::Cholesky::new((c + c.transpose()) * 0.5).is_some()
}

/// Largest |c_ij − c_ji| relative to the Frobenius norm.
pub fn relative_asymmetry(c: &Mat6) -> f64 {
    let norm = c.norm();
    if norm == 0.0 {
        return 0.0;
    }
    (c - c.transpose()).abs().max() / norm
}

pub fn to_rows(c: &Mat6) -> [[f64; 6]; 6] {
    let mut out = [[0.0; 6]; 6];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = c[(i, j)];
        }
    }
    out
}

pub fn from_rows(rows: &[[f64; 6]; 6]) -> Mat6 {
    Mat6::from_fn(|i, j| rows[i][j])
}

/// Serde adapter storing a [`Mat6`] as a row-major 6×6 array.
pub mod serde_rows {
    use super::{from_rows, to_rows, Mat6};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(c: &Mat6, s: S) -> Result<S::Ok, S::Error> {
        to_rows(c).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Mat6, D::Error> {
        let rows = <[[f64; 6]; 6]>::deserialize(d)?;
        Ok(from_rows(&rows))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bond_matrix_of_identity_is_identity() {
        assert_eq!(bond_matrix(&Matrix3::identity()), Mat6::identity());
    }

    #[test]
    fn bond_matrix_composes_like_rotations() {
        let a = rotation_about_3(23.0);
        let b = nalgebra::Rotation3::from_euler_angles(0.3, -0.7, 1.1).into_inner();
        let lhs = bond_matrix(&(a * b));
        let rhs = bond_matrix(&a) * bond_matrix(&b);
        assert!((lhs - rhs).abs().max() < 1e-14);
    }

    #[test]
    fn voigt_index_is_symmetric() {
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(voigt_index(i, j), voigt_index(j, i));
                assert_eq!(VOIGT_PAIRS[voigt_index(i, j)], (i.min(j), i.max(j)));
            }
        }
    }
}
