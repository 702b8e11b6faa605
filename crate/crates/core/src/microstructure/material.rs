use nalgebra::Cholesky;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::voigt::{bond_matrix, rotation_about_3, Mat6};

/// Transversely isotropic constituent with the symmetry axis along local 1.
///
/// The in-plane Poisson ratio is not an input: `nu23 = E2 / (2 G23) - 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransverseIsotropicMaterial {
    /// Axial Young's modulus [GPa].
    #[serde(rename = "E1")]
    pub e1: f64,
    /// Transverse Young's modulus [GPa].
    #[serde(rename = "E2")]
    pub e2: f64,
    /// Major Poisson ratio.
    pub nu12: f64,
    /// Axial shear modulus [GPa].
    #[serde(rename = "G12")]
    pub g12: f64,
    /// Transverse shear modulus [GPa].
    #[serde(rename = "G23")]
    pub g23: f64,
}

impl TransverseIsotropicMaterial {
    /// Glass fiber constants.
    pub const GLASS_FIBER: Self = Self {
        e1: 31.0,
        e2: 7.59,
        nu12: 0.3,
        g12: 3.52,
        g23: 2.69,
    };

    /// Polymer matrix constants.
    pub const POLYMER_MATRIX: Self = Self {
        e1: 2.79,
        e2: 2.76,
        nu12: 0.3,
        g12: 1.1,
        g23: 1.1,
    };

    pub fn isotropic(e: f64, nu: f64) -> Self {
        let g = e / (2.0 * (1.0 + nu));
        Self {
            e1: e,
            e2: e,
            nu12: nu,
            g12: g,
            g23: g,
        }
    }

    pub fn nu23(&self) -> f64 {
        self.e2 / (2.0 * self.g23) - 1.0
    }

    pub fn validate(&self) -> Result<()> {
        let moduli = [("E1", self.e1), ("E2", self.e2), ("G12", self.g12), ("G23", self.g23)];
        for (name, v) in moduli {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidMaterial(format!("{name} = {v} must be positive")));
            }
        }
        if !self.nu12.is_finite() {
            return Err(Error::InvalidMaterial("nu12 is not finite".into()));
        }
        Ok(())
    }

    /// Voigt compliance with engineering shears.
    pub fn compliance(&self) -> Mat6 {
        let nu23 = self.nu23();
        let mut s = Mat6::zeros();
        s[(0, 0)] = 1.0 / self.e1;
        s[(1, 1)] = 1.0 / self.e2;
        s[(2, 2)] = 1.0 / self.e2;
        let s12 = -self.nu12 / self.e1;
        s[(0, 1)] = s12;
        s[(1, 0)] = s12;
        s[(0, 2)] = s12;
        s[(2, 0)] = s12;
        s[(1, 2)] = -nu23 / self.e2;
        s[(2, 1)] = -nu23 / self.e2;
        s[(3, 3)] = 1.0 / self.g23;
        s[(4, 4)] = 1.0 / self.g12;
        s[(5, 5)] = 1.0 / self.g12;
        s
    }

    /// Recovers engineering constants from a transversely isotropic stiffness.
    pub fn from_stiffness(c: &Mat6) -> Result<Self> {
        let s = Cholesky::new(*c)
            .ok_or_else(|| Error::NotPositiveDefinite("stiffness".into()))?
            .inverse();
        let e1 = 1.0 / s[(0, 0)];
        Ok(Self {
            e1,
            e2: 1.0 / s[(1, 1)],
            nu12: -s[(0, 1)] * e1,
            g12: 1.0 / s[(5, 5)],
            g23: 1.0 / s[(3, 3)],
        })
    }
}

/// Stiffness of a transversely isotropic material, obtained by inverting its
/// Voigt compliance.
pub fn stiffness_from_engineering(mat: &TransverseIsotropicMaterial) -> Result<Mat6> {
    mat.validate()?;
    let chol = Cholesky::new(mat.compliance()).ok_or_else(|| {
        Error::NotPositiveDefinite(format!(
            "compliance of {mat:?} is indefinite; constants are thermodynamically inadmissible"
        ))
    })?;
    let c = chol.inverse();
    Ok((c + c.transpose()) * 0.5)
}

/// Rotates a stiffness by `angle_deg` about the stacking axis (3).
pub fn rotate_stiffness(c: &Mat6, angle_deg: f64) -> Mat6 {
    let m = bond_matrix(&rotation_about_3(angle_deg));
    let r = m * c * m.transpose();
    (r + r.transpose()) * 0.5
}
