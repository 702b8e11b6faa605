mod common;

use common::{isotropic, laminate_stiffness, rel_err};
use rve_uq::fem::{solve_rve, CgOptions};
use rve_uq::microstructure::{rotate_stiffness, stiffness_from_engineering, TransverseIsotropicMaterial, VoxelRVE};

#[test]
fn oracle_matches_frozen_values() {
    let d = laminate_stiffness(&[(0.5, isotropic(10.0, 0.3)), (0.5, isotropic(1.0, 0.3))]);
    let frozen = [
        (0, 0, 6.493506493506493),
        (0, 1, 2.2627372627372626),
        (2, 2, 2.4475524475524475),
        (0, 2, 1.048951048951049),
        (3, 3, 0.6993006993006993),
        (5, 5, 2.115384615384615),
    ];
    for (i, j, v) in frozen {
        assert!((d[(i, j)] - v).abs() < 1e-12 * v, "D{i}{j} = {}", d[(i, j)]);
    }
    let d = laminate_stiffness(&[(1.0 / 3.0, isotropic(10.0, 0.3)), (2.0 / 3.0, isotropic(1.0, 0.3))]);
    for (i, j, v) in [(0, 0, 4.748822605965462), (2, 2, 1.923076923076923), (3, 3, 0.5494505494505494)] {
        assert!((d[(i, j)] - v).abs() < 1e-12 * v);
    }
}

#[test]
fn oracle_of_identical_layers_is_the_layer() {
    let c = stiffness_from_engineering(&TransverseIsotropicMaterial::GLASS_FIBER).unwrap();
    let d = laminate_stiffness(&[(0.3, c), (0.7, c)]);
    assert!(rel_err(&d, &c) < 1e-13);
}

#[test]
fn grid_aligned_isotropic_laminate_is_exact() {
    let (stiff, soft) = (isotropic(10.0, 0.3), isotropic(1.0, 0.3));
    let exact = laminate_stiffness(&[(0.5, stiff), (0.5, soft)]);
    for n in [4, 8] {
        let rve = VoxelRVE::laminate([n, n, n], [1.0, 1.0, 1.0], stiff, soft, 0.5).unwrap();
        let (_, dh) = solve_rve(&rve, &CgOptions::default()).unwrap();
        assert!(rel_err(&dh.matrix, &exact) < 1e-8, "n = {n}: {}", rel_err(&dh.matrix, &exact));
    }
}

#[test]
fn anisotropic_rotated_laminate_matches_oracle() {
    // Rotated fibers couple shear and normal terms; the oracle handles the full matrix.
    let c = stiffness_from_engineering(&TransverseIsotropicMaterial::GLASS_FIBER).unwrap();
    let (lower, upper) = (rotate_stiffness(&c, 30.0), rotate_stiffness(&c, -60.0));
    let exact = laminate_stiffness(&[(0.25, lower), (0.75, upper)]);
    let rve = VoxelRVE::laminate([3, 5, 8], [2.0, 1.0, 0.7], lower, upper, 0.25).unwrap();
    let (_, dh) = solve_rve(&rve, &CgOptions::default()).unwrap();
    assert!(rel_err(&dh.matrix, &exact) < 1e-8, "{}", rel_err(&dh.matrix, &exact));
}

#[test]
fn off_grid_interface_converges_to_nominal_laminate() {
    let (stiff, soft) = (isotropic(10.0, 0.3), isotropic(1.0, 0.3));
    let exact = laminate_stiffness(&[(1.0 / 3.0, stiff), (2.0 / 3.0, soft)]);
    let errors: Vec<f64> = [8, 16, 32]
        .iter()
        .map(|&n| {
            let rve = VoxelRVE::laminate([2, 2, n], [1.0, 1.0, 1.0], stiff, soft, 1.0 / 3.0).unwrap();
            let (_, dh) = solve_rve(&rve, &CgOptions::default()).unwrap();
            rel_err(&dh.matrix, &exact)
        })
        .collect();
    assert!(errors[0] > errors[1] && errors[1] > errors[2], "{errors:?}");
}
