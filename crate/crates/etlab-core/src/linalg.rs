//! Small dense helpers for the n <= 6 value-level problems: Cholesky
//! factorization, triangular solves, and a cyclic Jacobi eigensolver.
//!
//! Jacobi is used instead of a QL/QR routine because the Ricci eigenframe
//! problems here routinely carry (n-1)-fold degenerate eigenvalues on
//! block-diagonal input, where Jacobi converges immediately and never mixes
//! distinct eigenspaces.

/// Lower-triangular Cholesky factor (row-major), or `None` if the matrix is
/// not positive-definite.
pub fn cholesky_factor(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i * n + j];
            for k in 0..j {
                sum -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if sum <= 0.0 {
                    return None;
                }
                l[i * n + i] = sum.sqrt();
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    Some(l)
}

/// Solve L x = b for lower-triangular L (row-major).
pub fn solve_lower(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; n];
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[i * n + k] * x[k];
        }
        x[i] = sum / l[i * n + i];
    }
    x
}

/// Solve L^T x = b for lower-triangular L (row-major).
pub fn solve_lower_transpose(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut sum = b[i];
        for k in i + 1..n {
            sum -= l[k * n + i] * x[k];
        }
        x[i] = sum / l[i * n + i];
    }
    x
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues ascending and eigenvectors as columns (row-major
/// storage: `vectors[i * n + k]` is component i of eigenvector k).
pub fn jacobi_eigen(a: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut m = a.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let scale: f64 = a
        .iter()
        .fold(0.0f64, |acc, x| acc.max(x.abs()))
        .max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let mut off: f64 = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off = off.max(m[p * n + q].abs());
            }
        }
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq.abs() <= 1e-18 * scale {
                    continue;
                }
                let tau = (m[q * n + q] - m[p * n + p]) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut eigenvalues: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
    // sort ascending, reordering columns to match
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eigenvalues[a]
            .partial_cmp(&eigenvalues[b])
            .expect("non-finite eigenvalue")
    });
    let sorted_values: Vec<f64> = order.iter().map(|&k| eigenvalues[k]).collect();
    let mut sorted_vectors = vec![0.0; n * n];
    for (new_k, &old_k) in order.iter().enumerate() {
        for i in 0..n {
            sorted_vectors[i * n + new_k] = v[i * n + old_k];
        }
    }
    eigenvalues = sorted_values;
    (eigenvalues, sorted_vectors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn jacobi_recovers_known_spectrum() {
        // A = Q diag(1, 2, 5) Q^T for a hand-built rotation
        let (c, s) = (0.6, 0.8);
        let q = [c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0];
        let d = [1.0, 2.0, 5.0];
        let mut a = [0.0; 9];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    a[i * 3 + j] += q[i * 3 + k] * d[k] * q[j * 3 + k];
                }
            }
        }
        let (vals, vecs) = jacobi_eigen(&a, 3);
        assert_relative_eq!(vals[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(vals[1], 2.0, epsilon = 1e-12);
        assert_relative_eq!(vals[2], 5.0, epsilon = 1e-12);
        // residual |A v - lambda v|
        for k in 0..3 {
            for i in 0..3 {
                let mut av = 0.0;
                for j in 0..3 {
                    av += a[i * 3 + j] * vecs[j * 3 + k];
                }
                assert_relative_eq!(av, vals[k] * vecs[i * 3 + k], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn jacobi_respects_degenerate_blocks() {
        // block diag(-0.2, 0.067, 0.067, 0.067) with roundoff off-diagonals:
        // eigenvectors must not mix the distinct eigenspaces
        let mut a = vec![0.0; 16];
        a[0] = -0.2;
        for i in 1..4 {
            a[i * 4 + i] = 0.067;
        }
        a[1] = 1e-17;
        a[4] = 1e-17;
        let (vals, vecs) = jacobi_eigen(&a, 4);
        assert_relative_eq!(vals[0], -0.2, epsilon = 1e-14);
        for k in 0..4 {
            for i in 0..4 {
                let mut av = 0.0;
                for j in 0..4 {
                    av += a[i * 4 + j] * vecs[j * 4 + k];
                }
                assert!((av - vals[k] * vecs[i * 4 + k]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn cholesky_solves_round_trip() {
        let a = [4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0];
        let l = cholesky_factor(&a, 3).unwrap();
        let b = [1.0, -2.0, 0.7];
        let y = solve_lower(&l, 3, &b);
        let x = solve_lower_transpose(&l, 3, &y);
        // check A x = b
        for i in 0..3 {
            let mut ax = 0.0;
            for j in 0..3 {
                ax += a[i * 3 + j] * x[j];
            }
            assert_relative_eq!(ax, b[i], epsilon = 1e-12);
        }
    }
}
