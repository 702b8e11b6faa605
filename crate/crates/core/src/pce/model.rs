use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::basis::{build_basis, MultiIndex};
use super::lar::lar_path;
use super::legendre::legendre_table;
use crate::error::{Error, Result};
use crate::microstructure::Interval;

pub const PCE_FORMAT: &str = "rve-uq/pce/1";

/// Inputs may overshoot their bounds by this much (in standardized units)
/// before evaluation reports an error; overshoots are clamped.
pub const CLAMP_TOL: f64 = 1e-9;

/// Sparse orthonormal Legendre expansion over a box of uniform inputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PceModel {
    pub format: String,
    pub bounds: Vec<Interval>,
    /// Active multi-indices; the zero index is always first.
    pub multi_indices: Vec<MultiIndex>,
    pub coefficients: Vec<f64>,
    /// Corrected relative leave-one-out error used for model selection.
    pub loo_error: f64,
    /// Relative leave-one-out error without the small-sample correction.
    pub loo_error_raw: f64,
    /// Total-degree truncation of the candidate basis that won selection.
    pub degree: u32,
    pub n_train: usize,
    /// Mean squared residual on the training set.
    pub training_mse: f64,
    /// `training_mse / Var(y)`.
    pub normalized_mse: f64,
    /// Candidates skipped because they made the active set rank deficient.
    pub rejected_candidates: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LarOptions {
    pub max_degree: u32,
    /// Stop raising the degree after this many increases without improvement.
    pub patience: u32,
}

impl Default for LarOptions {
    fn default() -> Self {
        Self {
            max_degree: 6,
            patience: 2,
        }
    }
}

/// Least-squares fit with hat-matrix leave-one-out diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct LeastSquaresFit {
    pub coefficients: Vec<f64>,
    pub residuals: Vec<f64>,
    pub leverages: Vec<f64>,
    /// `tr((AᵀA)⁻¹)`.
    pub inverse_gram_trace: f64,
}

impl LeastSquaresFit {
    /// Mean squared leave-one-out residual, `(1/N) Σ (r_i / (1 − h_i))²`.
    pub fn loo_mse(&self) -> f64 {
        let n = self.residuals.len() as f64;
        self.residuals
            .iter()
            .zip(&self.leverages)
            .map(|(r, h)| (r / (1.0 - h)).powi(2))
            .sum::<f64>()
            / n
    }

    /// Small-sample correction `N / (N − P) · (1 + tr((AᵀA)⁻¹))`.
    pub fn loo_correction(&self) -> f64 {
        let n = self.residuals.len() as f64;
        let p = self.coefficients.len() as f64;
        n / (n - p) * (1.0 + self.inverse_gram_trace)
    }
}

/// Ordinary least squares via thin QR. Fails when the design is rank deficient
/// or has no residual degrees of freedom.
pub fn least_squares(a: &DMatrix<f64>, y: &DVector<f64>) -> Result<LeastSquaresFit> {
    let (n, p) = a.shape();
    if p == 0 || p >= n {
        return Err(Error::InsufficientData(format!("{p} regressors for {n} samples")));
    }
    let qr = a.clone().qr();
    let r = qr.r();
    let q = qr.q();
    let diag_max = (0..p).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    if (0..p).any(|i| r[(i, i)].abs() <= 1e-10 * diag_max) {
        return Err(Error::InvalidArgument("rank-deficient design matrix".into()));
    }
    let qty = q.transpose() * y;
    let coef = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::InvalidArgument("singular triangular factor".into()))?;
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(p, p))
        .ok_or_else(|| Error::InvalidArgument("singular triangular factor".into()))?;
    let fitted = a * &coef;
    let residuals: Vec<f64> = y.iter().zip(fitted.iter()).map(|(y, f)| y - f).collect();
    let leverages = (0..n).map(|i| q.row(i).norm_squared()).collect();
    Ok(LeastSquaresFit {
        coefficients: coef.iter().copied().collect(),
        residuals,
        leverages,
        inverse_gram_trace: r_inv.norm_squared(),
    })
}

/// Maps physical inputs to [−1, 1] per column.
pub fn standardize(x: &[f64], bounds: &[Interval]) -> Result<Vec<f64>> {
    if x.len() != bounds.len() {
        return Err(Error::DimensionMismatch {
            expected: bounds.len(),
            got: x.len(),
        });
    }
    x.iter()
        .zip(bounds)
        .enumerate()
        .map(|(i, (&v, b))| {
            let u = 2.0 * (v - b.min) / b.width() - 1.0;
            if !u.is_finite() || u.abs() > 1.0 + CLAMP_TOL {
                Err(Error::OutOfBounds {
                    name: format!("input {i}"),
                    value: v,
                    min: b.min,
                    max: b.max,
                })
            } else {
                Ok(u.clamp(-1.0, 1.0))
            }
        })
        .collect()
}

/// Evaluates every basis function of `basis` at standardized points.
pub fn design_matrix(u: &[Vec<f64>], basis: &[MultiIndex]) -> DMatrix<f64> {
    let max_deg = basis
        .iter()
        .flat_map(|m| m.0.iter())
        .copied()
        .max()
        .unwrap_or(0) as usize;
    let dim = basis.first().map_or(0, |m| m.dim());
    let mut out = DMatrix::zeros(u.len(), basis.len());
    let mut tables = vec![vec![0.0; max_deg + 1]; dim];
    for (r, point) in u.iter().enumerate() {
        for (t, &x) in tables.iter_mut().zip(point) {
            legendre_table(x, t);
        }
        for (c, idx) in basis.iter().enumerate() {
            out[(r, c)] = idx.0.iter().enumerate().map(|(d, &a)| tables[d][a as usize]).product();
        }
    }
    out
}

struct Candidate {
    basis: Vec<MultiIndex>,
    fit: LeastSquaresFit,
    loo: f64,
    loo_raw: f64,
    degree: u32,
}

/// Fits a sparse expansion by hybrid LAR: the LAR path orders the candidate
/// basis, each prefix of the path is refitted by least squares, and the
/// prefix and degree with the smallest corrected leave-one-out error win.
pub fn fit_lar(x: &[Vec<f64>], y: &[f64], bounds: &[Interval], opts: &LarOptions) -> Result<PceModel> {
    let n = x.len();
    if n < 3 {
        return Err(Error::InsufficientData(format!("{n} samples; need at least 3")));
    }
    if y.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: y.len() });
    }
    let dim = bounds.len();
    let u: Vec<Vec<f64>> = x.iter().map(|row| standardize(row, bounds)).collect::<Result<_>>()?;
    let yv = DVector::from_column_slice(y);
    let mean = yv.mean();
    let var = yv.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let zero = MultiIndex::zero(dim);

    let spread = yv.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
    if spread <= 1e-14 * mean.abs() || spread == 0.0 {
        return Ok(PceModel {
            format: PCE_FORMAT.into(),
            bounds: bounds.to_vec(),
            multi_indices: vec![zero],
            coefficients: vec![mean],
            loo_error: 0.0,
            loo_error_raw: 0.0,
            degree: 0,
            n_train: n,
            training_mse: yv.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64,
            normalized_mse: 0.0,
            rejected_candidates: 0,
        });
    }

    let mut best: Option<Candidate> = None;
    let mut rejected = 0usize;
    let mut stale = 0u32;
    for degree in 1..=opts.max_degree.max(1) {
        let basis = build_basis(dim, degree);
        let psi = design_matrix(&u, &basis);
        let regressors = psi.columns(1, basis.len() - 1).into_owned();
        let path = lar_path(&regressors, &yv, n.saturating_sub(2));
        rejected += path.rejected.len();

        let mut degree_best: Option<Candidate> = None;
        for k in 1..=path.order.len() {
            if k + 1 >= n {
                break;
            }
            let mut cols = vec![0usize];
            cols.extend(path.order[..k].iter().map(|&j| j + 1));
            let a = DMatrix::from_fn(n, cols.len(), |r, c| psi[(r, cols[c])]);
            let fit = match least_squares(&a, &yv) {
                Ok(f) => f,
                Err(_) => {
                    rejected += 1;
                    continue;
                }
            };
            if fit.leverages.iter().any(|&h| 1.0 - h <= 1e-12) {
                continue;
            }
            let loo_raw = fit.loo_mse() / var;
            let loo = loo_raw * fit.loo_correction();
            if degree_best.as_ref().is_none_or(|b| loo < b.loo) {
                degree_best = Some(Candidate {
                    basis: cols.iter().map(|&c| basis[c].clone()).collect(),
                    fit,
                    loo,
                    loo_raw,
                    degree,
                });
            }
        }
        match (degree_best, &best) {
            (Some(c), None) => best = Some(c),
            (Some(c), Some(b)) if c.loo < b.loo => {
                best = Some(c);
                stale = 0;
            }
            _ => {
                stale += 1;
                if stale >= opts.patience {
                    break;
                }
            }
        }
    }

    let best = match best {
        Some(b) => b,
        None => {
            // Not even a single regressor could be refitted: fall back to the mean.
            let fit = least_squares(&DMatrix::from_element(n, 1, 1.0), &yv)?;
            let loo_raw = fit.loo_mse() / var;
            Candidate {
                basis: vec![zero],
                loo: loo_raw * fit.loo_correction(),
                loo_raw,
                fit,
                degree: 0,
            }
        }
    };
    let training_mse = best.fit.residuals.iter().map(|r| r * r).sum::<f64>() / n as f64;
    Ok(PceModel {
        format: PCE_FORMAT.into(),
        bounds: bounds.to_vec(),
        multi_indices: best.basis,
        coefficients: best.fit.coefficients,
        loo_error: best.loo,
        loo_error_raw: best.loo_raw,
        degree: best.degree,
        n_train: n,
        training_mse,
        normalized_mse: training_mse / var,
        rejected_candidates: rejected,
    })
}

impl PceModel {
    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn evaluate_one(&self, x: &[f64]) -> Result<f64> {
        let u = standardize(x, &self.bounds)?;
        let m = design_matrix(&[u], &self.multi_indices);
        Ok(m.row(0).iter().zip(&self.coefficients).map(|(p, c)| p * c).sum())
    }

    pub fn evaluate(&self, x: &[Vec<f64>]) -> Result<Vec<f64>> {
        let u: Vec<Vec<f64>> = x.iter().map(|r| standardize(r, &self.bounds)).collect::<Result<_>>()?;
        let m = design_matrix(&u, &self.multi_indices);
        let c = DVector::from_column_slice(&self.coefficients);
        Ok((m * c).iter().copied().collect())
    }

    /// Mean and variance under the uniform input measure.
    pub fn moments(&self) -> (f64, f64) {
        let mut mean = 0.0;
        let mut var = 0.0;
        for (idx, c) in self.multi_indices.iter().zip(&self.coefficients) {
            if idx.is_zero() {
                mean += c;
            } else {
                var += c * c;
            }
        }
        (mean, var)
    }

    pub fn max_index_degree(&self) -> u32 {
        self.multi_indices.iter().map(|m| m.total_degree()).max().unwrap_or(0)
    }
}
