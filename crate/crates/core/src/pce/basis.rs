use serde::{Deserialize, Serialize};

/// Degrees of the univariate factors of one tensor-product basis function.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(dim: usize) -> Self {
        Self(vec![0; dim])
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

/// All multi-indices of `dim` inputs with total degree ≤ `max_degree`, in
/// graded lexicographic order: by total degree, then with higher exponents on
/// earlier inputs first (`(1,0) < (0,1)`).
pub fn build_basis(dim: usize, max_degree: u32) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    let mut current = vec![0u32; dim];
    for degree in 0..=max_degree {
        fill(&mut current, 0, degree, &mut out);
    }
    out
}

fn fill(current: &mut [u32], pos: usize, remaining: u32, out: &mut Vec<MultiIndex>) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(MultiIndex(current.to_vec()));
        return;
    }
    if current.is_empty() {
        return;
    }
    for a in (0..=remaining).rev() {
        current[pos] = a;
        fill(current, pos + 1, remaining - a, out);
    }
    current[pos] = 0;
}

pub fn binomial(n: u64, k: u64) -> u64 {
    (0..k.min(n - k)).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_sizes() {
        assert_eq!(build_basis(6, 0).len(), 1);
        assert_eq!(build_basis(6, 5).len(), 462);
        assert_eq!(build_basis(6, 6).len(), 924);
        for d in 1..5 {
            for p in 0..6 {
                assert_eq!(build_basis(d, p).len() as u64, binomial((d as u64) + p as u64, p as u64));
            }
        }
    }

    #[test]
    fn graded_lex_order() {
        let b: Vec<Vec<u32>> = build_basis(2, 2).into_iter().map(|m| m.0).collect();
        assert_eq!(b, vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![2, 0], vec![1, 1], vec![0, 2]]);
        let b = build_basis(4, 4);
        assert!(b.windows(2).all(|w| w[0].total_degree() <= w[1].total_degree()));
        let unique: std::collections::BTreeSet<_> = b.iter().collect();
        assert_eq!(unique.len(), b.len());
        assert!(b[0].is_zero());
    }
}
