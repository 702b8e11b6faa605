//! Compressed sparse row storage and a Jacobi-preconditioned conjugate gradient.
//!
//! Reductions use fixed-size chunks so results do not depend on the thread
//! count or on work stealing.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const CHUNK: usize = 4096;

#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    pub nrows: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map(|p| vals[p]).unwrap_or(0.0)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows).map(|i| self.get(i, i)).collect()
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        y.par_chunks_mut(CHUNK).enumerate().for_each(|(c, out)| {
            let base = c * CHUNK;
            for (o, yi) in out.iter_mut().enumerate() {
                let (cols, vals) = self.row(base + o);
                *yi = cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum();
            }
        });
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// Largest |a_ij − a_ji| relative to the largest |a_ij|.
    pub fn relative_asymmetry(&self) -> f64 {
        let max = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut worst = 0.0f64;
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        if max == 0.0 {
            0.0
        } else {
            worst / max
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    let partial: Vec<f64> = a
        .par_chunks(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum())
        .collect();
    partial.iter().sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CgOptions {
    pub rel_tol: f64,
    /// `None` uses `20 √n`.
    pub max_iter: Option<usize>,
}

impl Default for CgOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            max_iter: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CgReport {
    pub iterations: usize,
    /// True residual `‖b − A x‖ / ‖b‖` after the last iteration.
    pub relative_residual: f64,
}

/// Solves `A x = b` for symmetric positive definite `A`.
pub fn pcg(a: &CsrMatrix, b: &[f64], opts: &CgOptions) -> Result<(Vec<f64>, CgReport)> {
    let n = a.nrows;
    let cap = opts
        .max_iter
        .unwrap_or_else(|| (20.0 * (n as f64).sqrt()).ceil() as usize)
        .max(1);
    let b_norm = norm(b);
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return Ok((
            x,
            CgReport {
                iterations: 0,
                relative_residual: 0.0,
            },
        ));
    }
    let inv_diag: Vec<f64> = a
        .diagonal()
        .iter()
        .map(|&d| {
            if d > 0.0 {
                Ok(1.0 / d)
            } else {
                Err(Error::SingularSystem(format!("non-positive diagonal entry {d}")))
            }
        })
        .collect::<Result<_>>()?;

    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    // Leaves headroom for drift between the recursive and true residual.
    let target = 0.5 * opts.rel_tol * b_norm;
    let mut iterations = 0;

    while iterations < cap {
        a.mul_vec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::SingularSystem(format!(
                "search direction with pᵀAp = {pap:e} at iteration {iterations}"
            )));
        }
        let alpha = rz / pap;
        x.par_iter_mut().zip(&p).for_each(|(x, p)| *x += alpha * p);
        r.par_iter_mut().zip(&ap).for_each(|(r, q)| *r -= alpha * q);
        iterations += 1;
        if norm(&r) <= target {
            break;
        }
        z.par_iter_mut()
            .zip(&r)
            .zip(&inv_diag)
            .for_each(|((z, r), d)| *z = r * d);
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        p.par_iter_mut().zip(&z).for_each(|(p, z)| *p = z + beta * *p);
    }

    // Recompute the true residual; the recursive one drifts.
    let ax = a.mul_vec(&x);
    let true_res = ax.iter().zip(b).map(|(ax, b)| (b - ax).powi(2)).sum::<f64>().sqrt() / b_norm;
    if true_res > opts.rel_tol {
        return Err(Error::NotConverged {
            iterations,
            residual: true_res,
        });
    }
    Ok((
        x,
        CgReport {
            iterations,
            relative_residual: true_res,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize) -> CsrMatrix {
        let mut row_ptr = vec![0];
        let mut col_idx = vec![];
        let mut values = vec![];
        for i in 0..n {
            if i > 0 {
                col_idx.push(i - 1);
                values.push(-1.0);
            }
            col_idx.push(i);
            values.push(2.0);
            if i + 1 < n {
                col_idx.push(i + 1);
                values.push(-1.0);
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix {
            nrows: n,
            row_ptr,
            col_idx,
            values,
        }
    }

    #[test]
    fn solves_tridiagonal_system() {
        let a = laplacian_1d(50);
        let b: Vec<f64> = (0..50).map(|i| (i as f64 * 0.3).sin()).collect();
        let (x, report) = pcg(&a, &b, &CgOptions::default()).unwrap();
        assert!(report.relative_residual <= 1e-9);
        let ax = a.mul_vec(&x);
        for (l, r) in ax.iter().zip(&b) {
            assert!((l - r).abs() < 1e-8);
        }
    }

    #[test]
    fn zero_rhs_returns_zero() {
        let a = laplacian_1d(5);
        let (x, report) = pcg(&a, &[0.0; 5], &CgOptions::default()).unwrap();
        assert!(x.iter().all(|&v| v == 0.0));
        assert_eq!(report.iterations, 0);
    }

    #[test]
    fn iteration_cap_reports_residual() {
        let a = laplacian_1d(400);
        let b = vec![1.0; 400];
        let opts = CgOptions {
            rel_tol: 1e-12,
            max_iter: Some(3),
        };
        match pcg(&a, &b, &opts) {
            Err(Error::NotConverged { iterations, residual }) => {
                assert_eq!(iterations, 3);
                assert!(residual > 1e-12);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }
}
