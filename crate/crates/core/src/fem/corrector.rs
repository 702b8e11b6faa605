use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::assembly::{ElementLibrary, LinearSystem};
use super::element::ElementLoads;
use super::mesh::PeriodicMesh;
use super::sparse::{pcg, CgOptions, CgReport};
use crate::error::{Error, Result};
use crate::microstructure::VoxelRVE;
use crate::voigt::{is_positive_definite, relative_asymmetry, Mat6};

/// Six periodic corrector fields on the node grid of `mesh`.
///
/// `fields[case][node]` holds the displacement of the unit macro strain
/// `case` in Voigt order. Slave nodes carry a copy of their master value.
/// With these signs the micro strain is `ε̄ − ∇ˢχ ε̄`.
#[derive(Clone, Debug)]
pub struct CorrectorSolution {
    pub mesh: PeriodicMesh,
    pub fields: [Vec<[f64; 3]>; 6],
    pub reports: [CgReport; 6],
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomogenizedStiffness {
    /// Symmetrized 6×6 Voigt stiffness [GPa].
    #[serde(with = "crate::voigt::serde_rows")]
    pub matrix: Mat6,
    /// Relative asymmetry before symmetrization.
    pub asymmetry: f64,
}

/// Per-element map from macro strain to quadrature-averaged micro stress.
#[derive(Clone, Debug)]
pub struct LocalizationOperator {
    pub per_element: Vec<Mat6>,
    pub element_volume: f64,
}

impl CorrectorSolution {
    /// Gathers the 24 element DOFs of every case into one 24×6 block.
    fn element_block(&self, e: usize) -> ElementLoads {
        let nodes = self.mesh.element_nodes(e);
        ElementLoads::from_fn(|r, case| self.fields[case][nodes[r / 3]][r % 3])
    }

    /// Volume mean of each field (trilinear interpolation, exact per element).
    pub fn volume_means(&self) -> [[f64; 3]; 6] {
        let n_elem = self.mesh.num_elements();
        std::array::from_fn(|case| {
            let mut acc = [0.0; 3];
            for e in 0..n_elem {
                for n in self.mesh.element_nodes(e) {
                    for c in 0..3 {
                        acc[c] += self.fields[case][n][c];
                    }
                }
            }
            acc.map(|v| v / (8.0 * n_elem as f64))
        })
    }

    /// Copy shifted by a constant so every field has zero volume mean.
    pub fn zero_mean_shifted(&self) -> Self {
        let means = self.volume_means();
        let mut out = self.clone();
        for (field, mean) in out.fields.iter_mut().zip(means) {
            for v in field.iter_mut() {
                for c in 0..3 {
                    v[c] -= mean[c];
                }
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.fields
            .iter()
            .flatten()
            .flat_map(|v| v.iter())
            .fold(0.0, |m: f64, x| m.max(x.abs()))
    }
}

/// Solves the six corrector problems (concurrently) and scatters master
/// values to slave nodes.
pub fn solve_correctors(
    sys: &LinearSystem,
    mesh: &PeriodicMesh,
    opts: &CgOptions,
) -> Result<CorrectorSolution> {
    if sys.matrix.nrows != 3 * mesh.num_masters() {
        return Err(Error::DimensionMismatch {
            expected: 3 * mesh.num_masters(),
            got: sys.matrix.nrows,
        });
    }
    let solved: Vec<(Vec<f64>, CgReport)> = sys
        .rhs
        .par_iter()
        .map(|b| pcg(&sys.matrix, b, opts))
        .collect::<Result<_>>()?;
    let mut reports = [CgReport {
        iterations: 0,
        relative_residual: 0.0,
    }; 6];
    let mut fields: [Vec<[f64; 3]>; 6] = Default::default();
    for (case, (x, report)) in solved.into_iter().enumerate() {
        reports[case] = report;
        fields[case] = (0..mesh.num_nodes())
            .map(|n| {
                let s = mesh.slot_of(n);
                [x[3 * s], x[3 * s + 1], x[3 * s + 2]]
            })
            .collect();
    }
    Ok(CorrectorSolution {
        mesh: mesh.clone(),
        fields,
        reports,
    })
}

fn check_pairing(rve: &VoxelRVE, corr: &CorrectorSolution) -> Result<()> {
    if rve.dims() != corr.mesh.dims() {
        return Err(Error::InvalidArgument(format!(
            "corrector mesh dims {:?} do not match RVE dims {:?}",
            corr.mesh.dims(),
            rve.dims()
        )));
    }
    Ok(())
}

/// Localization operator `D (I − B̄ χ)` for every element.
pub fn localization_operator(rve: &VoxelRVE, corr: &CorrectorSolution) -> Result<LocalizationOperator> {
    check_pairing(rve, corr)?;
    let lib = ElementLibrary::new(rve);
    let quad = &lib.quadrature;
    let per_element = (0..rve.num_voxels())
        .into_par_iter()
        .map(|e| {
            let chi = corr.element_block(e);
            let d = rve.stiffness_of(e);
            // Quadrature average of D (I − B_q χ); B is linear, so this is the centroid value.
            let mut acc = Mat6::zeros();
            for b in &quad.strain {
                acc += d * (Mat6::identity() - b * chi);
            }
            acc / 8.0
        })
        .collect();
    Ok(LocalizationOperator {
        per_element,
        element_volume: quad.volume,
    })
}

impl LocalizationOperator {
    pub fn volume_average(&self) -> Mat6 {
        // Fixed-size chunks keep the reduction order independent of threading.
        let partial: Vec<Mat6> = self
            .per_element
            .par_chunks(1024)
            .map(|c| c.iter().fold(Mat6::zeros(), |a, m| a + m))
            .collect();
        partial.iter().fold(Mat6::zeros(), |a, m| a + m) / self.per_element.len() as f64
    }

    pub fn apply(&self, macro_strain: &[f64; 6]) -> Vec<[f64; 6]> {
        let eps = nalgebra::Vector6::from_row_slice(macro_strain);
        self.per_element
            .iter()
            .map(|l| {
                let s = l * eps;
                [s[0], s[1], s[2], s[3], s[4], s[5]]
            })
            .collect()
    }
}

/// Homogenized stiffness `⟨D (I − ∇ˢχ)⟩`, symmetrized.
pub fn homogenize(rve: &VoxelRVE, corr: &CorrectorSolution) -> Result<HomogenizedStiffness> {
    let raw = localization_operator(rve, corr)?.volume_average();
    let asymmetry = relative_asymmetry(&raw);
    let matrix = (raw + raw.transpose()) * 0.5;
    if !is_positive_definite(&matrix) {
        log::warn!("homogenized stiffness is not positive definite");
    }
    Ok(HomogenizedStiffness { matrix, asymmetry })
}

/// Micro stress per element for the macro strain `macro_strain`
/// (engineering shears).
pub fn localize_stress(
    rve: &VoxelRVE,
    corr: &CorrectorSolution,
    macro_strain: &[f64; 6],
) -> Result<Vec<[f64; 6]>> {
    if macro_strain.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("macro strain must be finite".into()));
    }
    Ok(localization_operator(rve, corr)?.apply(macro_strain))
}
