#![allow(dead_code)]

use nalgebra::{Matrix3, Vector6};
use rve_uq::microstructure::{stiffness_from_engineering, TransverseIsotropicMaterial};
use rve_uq::voigt::Mat6;

/// Normal-direction (33, 23, 13) and in-plane (11, 22, 12) Voigt slots.
const N: [usize; 3] = [2, 3, 4];
const P: [usize; 3] = [0, 1, 5];

pub fn isotropic(e: f64, nu: f64) -> Mat6 {
    stiffness_from_engineering(&TransverseIsotropicMaterial::isotropic(e, nu)).unwrap()
}

fn block(c: &Mat6, rows: [usize; 3], cols: [usize; 3]) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| c[(rows[i], cols[j])])
}

/// Exact effective stiffness of layers stacked along axis 3.
///
/// In-plane strains and normal tractions are uniform across the stack; for
/// each macro strain the uniform tractions solve the averaged normal strain
/// condition, and the average stress gives one column of the result.
pub fn laminate_stiffness(layers: &[(f64, Mat6)]) -> Mat6 {
    let a: Matrix3<f64> = layers
        .iter()
        .map(|(f, c)| block(c, N, N).try_inverse().unwrap() * *f)
        .sum();
    let mut d = Mat6::zeros();
    for col in 0..6 {
        let mut e = Vector6::zeros();
        e[col] = 1.0;
        let e_p = nalgebra::Vector3::new(e[P[0]], e[P[1]], e[P[2]]);
        let e_n = nalgebra::Vector3::new(e[N[0]], e[N[1]], e[N[2]]);
        let rhs: nalgebra::Vector3<f64> = e_n
            + layers
                .iter()
                .map(|(f, c)| block(c, N, N).try_inverse().unwrap() * block(c, N, P) * e_p * *f)
                .sum::<nalgebra::Vector3<f64>>();
        let s_n = a.try_inverse().unwrap() * rhs;
        let mut sigma = Vector6::zeros();
        for (f, c) in layers {
            let eps_n = block(c, N, N).try_inverse().unwrap() * (s_n - block(c, N, P) * e_p);
            let mut eps = Vector6::zeros();
            for k in 0..3 {
                eps[P[k]] = e_p[k];
                eps[N[k]] = eps_n[k];
            }
            sigma += c * eps * *f;
        }
        d.set_column(col, &sigma);
    }
    d
}

pub fn rel_err(a: &Mat6, b: &Mat6) -> f64 {
    (a - b).norm() / b.norm()
}

pub const ISHIGAMI_A: f64 = 7.0;
pub const ISHIGAMI_B: f64 = 0.1;

pub fn ishigami(x: &[f64]) -> f64 {
    x[0].sin() + ISHIGAMI_A * x[1].sin().powi(2) + ISHIGAMI_B * x[2].powi(4) * x[0].sin()
}

/// Closed-form variance, first-order indices and total indices of the Ishigami function
/// with inputs uniform on [−π, π]³.
pub fn ishigami_indices() -> (f64, [f64; 3], [f64; 3]) {
    use std::f64::consts::PI;
    let (a, b) = (ISHIGAMI_A, ISHIGAMI_B);
    let v1 = 0.5 * (1.0 + b * PI.powi(4) / 5.0).powi(2);
    let v2 = a * a / 8.0;
    let v13 = b * b * PI.powi(8) * (1.0 / 18.0 - 1.0 / 50.0);
    let v = v1 + v2 + v13;
    (v, [v1 / v, v2 / v, 0.0], [(v1 + v13) / v, v2 / v, v13 / v])
}
