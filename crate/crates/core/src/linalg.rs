//! Small dense helpers: singular values and numerical rank.

use alloc::vec::Vec;

#[allow(unused_imports)] // inherent under std
use num_traits::Float;

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Singular values of a `rows × cols` row-major matrix, descending.
///
/// One-sided Jacobi: the rows are rotated pairwise until mutually orthogonal,
/// after which their norms are the singular values.
pub fn singular_values(data: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    debug_assert_eq!(data.len(), rows * cols);
    let mut a: Vec<f64> = data.to_vec();
    const SWEEPS: usize = 60;
    for _ in 0..SWEEPS {
        let mut rotated = false;
        for p in 0..rows {
            for q in p + 1..rows {
                let (alpha, beta, gamma) = {
                    let rp = &a[p * cols..(p + 1) * cols];
                    let rq = &a[q * cols..(q + 1) * cols];
                    (dot(rp, rp), dot(rq, rq), dot(rp, rq))
                };
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for k in 0..cols {
                    let xp = a[p * cols + k];
                    let xq = a[q * cols + k];
                    a[p * cols + k] = c * xp - s * xq;
                    a[q * cols + k] = s * xp + c * xq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = (0..rows).map(|p| norm(&a[p * cols..(p + 1) * cols])).collect();
    sv.sort_by(|x, y| y.partial_cmp(x).unwrap_or(core::cmp::Ordering::Equal));
    sv
}

/// Number of singular values above `rel_tol · σ_max`.
pub fn numeric_rank(data: &[f64], rows: usize, cols: usize, rel_tol: f64) -> usize {
    if rows == 0 || cols == 0 {
        return 0;
    }
    let sv = singular_values(data, rows, cols);
    let smax = sv[0];
    if smax == 0.0 || !smax.is_finite() {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * smax).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_of_simple_matrices() {
        // columns (1,0), (0,1), (1,1) in R^2, stored with rows = coordinates
        let m = [1.0, 0.0, 1.0, 0.0, 1.0, 1.0];
        assert_eq!(numeric_rank(&m, 2, 3, 1e-8), 2);
        let dependent = [1.0, 2.0, 3.0, 2.0, 4.0, 6.0];
        assert_eq!(numeric_rank(&dependent, 2, 3, 1e-8), 1);
        assert_eq!(numeric_rank(&[0.0; 4], 2, 2, 1e-8), 0);
    }

    #[test]
    fn singular_values_of_diagonal() {
        let sv = singular_values(&[3.0, 0.0, 0.0, 0.0, -4.0, 0.0], 2, 3);
        assert!((sv[0] - 4.0).abs() < 1e-14);
        assert!((sv[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn singular_values_match_gram_eigenvalues() {
        // 2x2 [[1,2],[3,4]]: σ² are eigenvalues of AAᵀ = [[5,11],[11,25]]
        let sv = singular_values(&[1.0, 2.0, 3.0, 4.0], 2, 2);
        let tr = 30.0;
        let det = 4.0;
        let l1 = (tr + (tr * tr - 4.0 * det).sqrt()) / 2.0;
        let l2 = (tr - (tr * tr - 4.0 * det).sqrt()) / 2.0;
        assert!((sv[0] * sv[0] - l1).abs() < 1e-10);
        assert!((sv[1] * sv[1] - l2).abs() < 1e-10);
    }
}
