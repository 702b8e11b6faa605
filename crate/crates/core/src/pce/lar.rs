//! Least angle regression path (Efron et al.), used only to rank regressors:
//! the order in which variables enter the active set.

use nalgebra::{Cholesky, DMatrix, DVector};

/// Entry order of the LAR path and the candidates rejected on the way.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LarPath {
    /// Column indices in the order they joined the active set.
    pub order: Vec<usize>,
    /// Columns dropped because they made the active Gram matrix singular.
    pub rejected: Vec<usize>,
}

/// Runs LAR on the columns of `x` against `y`, for at most `max_steps` entries.
/// Columns and response are centred and columns scaled to unit norm first;
/// constant columns are never selected. Ties go to the lowest column index.
pub fn lar_path(x: &DMatrix<f64>, y: &DVector<f64>, max_steps: usize) -> LarPath {
    let (n, m) = x.shape();
    let mut path = LarPath::default();
    if n < 2 || m == 0 {
        return path;
    }
    let y_mean = y.mean();
    let mut residual = y.map(|v| v - y_mean);

    let mut xn = x.clone();
    let mut usable = vec![true; m];
    for j in 0..m {
        let mean = xn.column(j).mean();
        let mut col = xn.column_mut(j);
        col.add_scalar_mut(-mean);
        let norm = col.norm();
        if norm <= 1e-12 * (n as f64).sqrt() {
            usable[j] = false;
        } else {
            col /= norm;
        }
    }

    let initial = (xn.transpose() * &residual).amax();
    if initial == 0.0 {
        return path;
    }
    let mut active: Vec<usize> = Vec::new();
    let mut in_active = vec![false; m];
    let steps = max_steps.min(n - 1).min(usable.iter().filter(|&&u| u).count());

    while active.len() < steps {
        let corr = xn.transpose() * &residual;
        if active.is_empty() {
            match argmax_abs(&corr, |j| usable[j]) {
                Some(j) => {
                    active.push(j);
                    in_active[j] = true;
                    path.order.push(j);
                }
                None => break,
            }
        }
        let c_max = active.iter().map(|&j| corr[j].abs()).fold(0.0, f64::max);
        if c_max <= 1e-13 * initial {
            break;
        }

        let k = active.len();
        let signs: Vec<f64> = active.iter().map(|&j| corr[j].signum()).collect();
        let xa = DMatrix::from_fn(n, k, |r, c| xn[(r, active[c])] * signs[c]);
        let gram = xa.transpose() * &xa;
        let chol = match Cholesky::new(gram) {
            Some(ch) if min_pivot(&ch) > 1e-10 => ch,
            _ => {
                // The newest entrant is collinear with the active set.
                let j = active.pop().expect("non-empty active set");
                in_active[j] = false;
                usable[j] = false;
                path.order.pop();
                path.rejected.push(j);
                continue;
            }
        };
        let ones = DVector::from_element(k, 1.0);
        let g = chol.solve(&ones);
        let a_scale = 1.0 / ones.dot(&g).sqrt();
        let w = g * a_scale;
        let u = &xa * &w;
        let a = xn.transpose() * &u;

        let mut gamma = c_max / a_scale;
        let mut entering = None;
        for j in 0..m {
            if in_active[j] || !usable[j] {
                continue;
            }
            for cand in [
                (c_max - corr[j]) / (a_scale - a[j]),
                (c_max + corr[j]) / (a_scale + a[j]),
            ] {
                if cand > 1e-14 * gamma.max(1e-300) && cand < gamma {
                    gamma = cand;
                    entering = Some(j);
                }
            }
        }
        residual -= &u * gamma;
        match entering {
            Some(j) => {
                active.push(j);
                in_active[j] = true;
                path.order.push(j);
            }
            None => break,
        }
    }
    path
}

fn argmax_abs(v: &DVector<f64>, allowed: impl Fn(usize) -> bool) -> Option<usize> {
    let mut best: Option<usize> = None;
    for j in 0..v.len() {
        if allowed(j) && best.is_none_or(|b| v[j].abs() > v[b].abs()) {
            best = Some(j);
        }
    }
    best
}

fn min_pivot(ch: &Cholesky<f64, nalgebra::Dyn>) -> f64 {
    let l = ch.l_dirty();
    (0..l.nrows()).map(|i| l[(i, i)]).fold(f64::INFINITY, f64::min)
}
