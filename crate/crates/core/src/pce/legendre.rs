/// Orthonormal Legendre polynomial of degree `k` under the uniform measure
/// `dx / 2` on [−1, 1]: `φ_k = √(2k + 1) P_k`.
pub fn legendre_orthonormal(k: usize, x: f64) -> f64 {
    let mut table = vec![0.0; k + 1];
    legendre_table(x, &mut table);
    table[k]
}

/// Fills `out[k]` with `φ_k(x)` for `k = 0..out.len()`, by the three-term
/// recurrence `(k + 1) P_{k+1} = (2k + 1) x P_k − k P_{k−1}`.
pub fn legendre_table(x: f64, out: &mut [f64]) {
    let (mut p_prev, mut p) = (0.0, 1.0);
    for (k, slot) in out.iter_mut().enumerate() {
        *slot = p * ((2 * k + 1) as f64).sqrt();
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
        p_prev = p;
        p = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Gauss–Legendre nodes and weights by Newton iteration on P_n.
    fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
        (0..n)
            .map(|i| {
                let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
                let mut dp = 0.0;
                for _ in 0..100 {
                    let (mut p0, mut p1) = (1.0, x);
                    for k in 2..=n {
                        let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                        p0 = p1;
                        p1 = pk;
                    }
                    dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                    let dx = p1 / dp;
                    x -= dx;
                    if dx.abs() < 1e-16 {
                        break;
                    }
                }
                (x, 2.0 / ((1.0 - x * x) * dp * dp))
            })
            .collect()
    }

    #[test]
    fn low_degree_values() {
        for x in [-1.0, -0.3, 0.0, 0.8, 1.0] {
            assert_eq!(legendre_orthonormal(0, x), 1.0);
        }
        assert!((legendre_orthonormal(1, 1.0) - 3f64.sqrt()).abs() < 1e-15);
        let x = 0.4;
        let p2 = 0.5 * (3.0 * x * x - 1.0);
        assert!((legendre_orthonormal(2, x) - 5f64.sqrt() * p2).abs() < 1e-15);
    }

    #[test]
    fn orthonormal_under_quadrature() {
        let rule = gauss_legendre(64);
        assert!((rule.iter().map(|(_, w)| w).sum::<f64>() - 2.0).abs() < 1e-13);
        for j in 0..10 {
            for k in 0..10 {
                let ip: f64 = rule
                    .iter()
                    .map(|&(x, w)| 0.5 * w * legendre_orthonormal(j, x) * legendre_orthonormal(k, x))
                    .sum();
                let expected = if j == k { 1.0 } else { 0.0 };
                assert!((ip - expected).abs() < 1e-12, "<φ{j}, φ{k}> = {ip}");
            }
        }
    }
}
