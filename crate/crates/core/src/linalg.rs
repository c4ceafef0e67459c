//! Small dense symmetric-matrix kernels (row-major `Vec<f64>`, n <= ~16).

/// Frobenius inner product of two n x n matrices.
pub(crate) fn frob_inner(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// c = a * b for n x n row-major matrices.
pub(crate) fn mat_mul(a: &[f64], b: &[f64], n: usize, c: &mut [f64]) {
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            for k in 0..n {
                s += a[i * n + k] * b[k * n + j];
            }
            c[i * n + j] = s;
        }
    }
}

/// b = v^T a v (congruence by the column-eigenvector matrix v).
pub(crate) fn congruence(a: &[f64], v: &[f64], n: usize) -> Vec<f64> {
    let mut av = vec![0.0; n * n];
    mat_mul(a, v, n, &mut av);
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            for k in 0..n {
                s += v[k * n + i] * av[k * n + j];
            }
            out[i * n + j] = s;
        }
    }
    out
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Returns eigenvalues (descending, stable for ties) and the matching
/// eigenvectors as columns of `v`, so `a = v diag(l) v^T`.
pub(crate) fn jacobi_eigen(a_in: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut a = a_in.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let scale: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
    let tol = 1e-15 * scale;
    for _sweep in 0..64 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p * n + q].abs();
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
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
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[j * n + j]
            .partial_cmp(&a[i * n + i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let eigvals: Vec<f64> = order.iter().map(|&i| a[i * n + i]).collect();
    let mut eigvecs = vec![0.0; n * n];
    for (newcol, &oldcol) in order.iter().enumerate() {
        for k in 0..n {
            eigvecs[k * n + newcol] = v[k * n + oldcol];
        }
    }
    (eigvals, eigvecs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_reconstructs() {
        let n = 5;
        // fixed symmetric matrix
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let v = ((i * 3 + j * 7) % 11) as f64 / 11.0 + if i == j { 2.0 } else { 0.0 };
                a[i * n + j] = v;
            }
        }
        for i in 0..n {
            for j in 0..i {
                let m = 0.5 * (a[i * n + j] + a[j * n + i]);
                a[i * n + j] = m;
                a[j * n + i] = m;
            }
        }
        let (l, v) = jacobi_eigen(&a, n);
        assert!(l.windows(2).all(|w| w[0] >= w[1]));
        // v diag(l) v^T == a
        let mut rec = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += v[i * n + k] * l[k] * v[j * n + k];
                }
                rec[i * n + j] = s;
            }
        }
        for (x, y) in rec.iter().zip(&a) {
            assert!((x - y).abs() < 1e-12, "{x} vs {y}");
        }
    }
}
