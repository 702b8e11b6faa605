//! Principal components of flattened homogenized stiffness tensors.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::voigt::Mat6;

pub const FLAT_LEN: usize = 9;

/// Voigt positions of the flattened entries
/// (D1111, D2222, D3333, D2323, D1313, D1212, D2233, D1133, D1122).
pub const FLAT_ENTRIES: [(usize, usize); FLAT_LEN] =
    [(0, 0), (1, 1), (2, 2), (3, 3), (4, 4), (5, 5), (1, 2), (0, 2), (0, 1)];

pub const FLAT_NAMES: [&str; FLAT_LEN] =
    ["D1111", "D2222", "D3333", "D2323", "D1313", "D1212", "D2233", "D1133", "D1122"];

pub type FlattenedStiffness = [f64; FLAT_LEN];

/// Relative tolerance above which dropped off-pattern entries are reported.
pub const OFF_PATTERN_TOL: f64 = 1e-6;

/// Flattens the orthotropic pattern of `d` and returns the largest dropped
/// off-pattern entry relative to `‖d‖`.
pub fn flatten_with_residual(d: &Mat6) -> (FlattenedStiffness, f64) {
    let flat = FLAT_ENTRIES.map(|(i, j)| d[(i, j)]);
    let norm = d.norm();
    let mut dropped = 0.0f64;
    for i in 0..6 {
        for j in 0..6 {
            let kept = FLAT_ENTRIES.iter().any(|&(a, b)| (a, b) == (i, j) || (b, a) == (i, j));
            if !kept {
                dropped = dropped.max(d[(i, j)].abs());
            }
        }
    }
    (flat, if norm > 0.0 { dropped / norm } else { 0.0 })
}

pub fn flatten(d: &Mat6) -> FlattenedStiffness {
    let (flat, dropped) = flatten_with_residual(d);
    if dropped > OFF_PATTERN_TOL {
        log::warn!("flatten: dropping off-pattern entries up to {dropped:.3e} relative to the norm");
    }
    flat
}

pub fn unflatten(flat: &FlattenedStiffness) -> Mat6 {
    let mut d = Mat6::zeros();
    for (&(i, j), &v) in FLAT_ENTRIES.iter().zip(flat) {
        d[(i, j)] = v;
        d[(j, i)] = v;
    }
    d
}

/// Fitted principal-component model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    /// Flattened entry order of `mean` and every component.
    pub ordering: Vec<String>,
    pub mean: Vec<f64>,
    /// Retained orthonormal components; rows are components.
    pub components: Vec<Vec<f64>>,
    /// Variance ratios of all ranks (length 9, zero-padded beyond the data rank).
    pub explained_variance_ratio: Vec<f64>,
    /// Sample variances (N − 1 normalization) of all ranks.
    pub explained_variance: Vec<f64>,
    /// Coefficients λ of the training rows; `coefficients[run][component]`.
    pub coefficients: Vec<Vec<f64>>,
}

/// Mean-centred SVD of `data` (rows are observations, 9 columns).
pub fn fit_pca(data: &[FlattenedStiffness], n_components: usize) -> Result<PcaModel> {
    let n = data.len();
    if n_components == 0 || n_components > n.min(FLAT_LEN) {
        return Err(Error::InvalidArgument(format!(
            "n_components = {n_components} must lie in [1, min(N = {n}, {FLAT_LEN})]"
        )));
    }
    let mut mean = [0.0; FLAT_LEN];
    for row in data {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let centered = DMatrix::from_fn(n, FLAT_LEN, |r, c| data[r][c] - mean[c]);

    let svd = centered.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]).then(a.cmp(&b)));

    let denom = if n > 1 { (n - 1) as f64 } else { 1.0 };
    let mut explained_variance = vec![0.0; FLAT_LEN];
    for (rank, &k) in order.iter().enumerate() {
        explained_variance[rank] = svd.singular_values[k].powi(2) / denom;
    }
    let total: f64 = explained_variance.iter().sum();
    let explained_variance_ratio = explained_variance
        .iter()
        .map(|v| if total > 0.0 { v / total } else { 0.0 })
        .collect();

    let components: Vec<Vec<f64>> = order
        .iter()
        .take(n_components)
        .map(|&k| {
            let mut row: Vec<f64> = v_t.row(k).iter().copied().collect();
            // Sign convention: largest-magnitude entry positive (first on ties).
            let pivot = row
                .iter()
                .enumerate()
                .fold(0, |best, (i, v)| if v.abs() > row[best].abs() { i } else { best });
            if row[pivot] < 0.0 {
                row.iter_mut().for_each(|v| *v = -*v);
            }
            row
        })
        .collect();

    let mut model = PcaModel {
        ordering: FLAT_NAMES.iter().map(|s| s.to_string()).collect(),
        mean: mean.to_vec(),
        components,
        explained_variance_ratio,
        explained_variance,
        coefficients: Vec::new(),
    };
    model.coefficients = data.iter().map(|row| model.transform(row)).collect::<Result<_>>()?;
    Ok(model)
}

impl PcaModel {
    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    /// Projects a flattened tensor onto the components.
    pub fn transform(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.mean.len() {
            return Err(Error::DimensionMismatch {
                expected: self.mean.len(),
                got: x.len(),
            });
        }
        Ok(self
            .components
            .iter()
            .map(|c| c.iter().zip(x).zip(&self.mean).map(|((c, x), m)| c * (x - m)).sum())
            .collect())
    }

    /// `μ + Σ_m λ_m D_m`.
    pub fn reconstruct(&self, lambda: &[f64]) -> Result<Vec<f64>> {
        if lambda.len() != self.components.len() {
            return Err(Error::DimensionMismatch {
                expected: self.components.len(),
                got: lambda.len(),
            });
        }
        let mut out = self.mean.clone();
        for (l, c) in lambda.iter().zip(&self.components) {
            for (o, v) in out.iter_mut().zip(c) {
                *o += l * v;
            }
        }
        Ok(out)
    }

    /// Fraction of the total variance captured by the retained components.
    pub fn retained_ratio(&self) -> f64 {
        self.explained_variance_ratio[..self.components.len()].iter().sum()
    }
}
