//! Variance-based sensitivity indices read off the chaos coefficients.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pce::PceModel;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SobolIndices {
    pub first_order: Vec<f64>,
    pub total: Vec<f64>,
}

/// First-order and total indices of every input.
///
/// With `V = Σ_{a≠0} c_a²`, input `i` collects `c_a²` from indices that
/// involve only `i` (first order) or involve `i` at all (total).
pub fn sobol_from_pce(model: &PceModel) -> Result<SobolIndices> {
    let dim = model.dim();
    let (_, variance) = model.moments();
    if !(variance > 0.0) {
        return Err(Error::ZeroVariance);
    }
    let mut first_order = vec![0.0; dim];
    let mut total = vec![0.0; dim];
    for (idx, c) in model.multi_indices.iter().zip(&model.coefficients) {
        if idx.is_zero() {
            continue;
        }
        let share = c * c / variance;
        let support: Vec<usize> = (0..dim).filter(|&i| idx.0[i] > 0).collect();
        if support.len() == 1 {
            first_order[support[0]] += share;
        }
        for i in support {
            total[i] += share;
        }
    }
    Ok(SobolIndices { first_order, total })
}
