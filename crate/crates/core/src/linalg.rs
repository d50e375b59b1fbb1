//! Small dense linear algebra on row-major `n × n` slices.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Inverse by Gauss–Jordan elimination with partial pivoting.
pub fn invert<S: Scalar>(n: usize, a: &[S]) -> Result<Vec<S>> {
    let scale = a.iter().fold(S::zero(), |m, v| m.max(v.abs()));
    let mut m = a.to_vec();
    let mut inv = vec![S::zero(); n * n];
    for i in 0..n {
        inv[i * n + i] = S::one();
    }
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r, &s| m[r * n + col].abs().partial_cmp(&m[s * n + col].abs()).unwrap())
            .unwrap();
        let p = m[pivot * n + col];
        if p.abs() <= S::epsilon() * S::lit(16.0) * scale || !p.is_finite() {
            return Err(Error::Singular(p.as_f64()));
        }
        if pivot != col {
            for k in 0..n {
                m.swap(pivot * n + k, col * n + k);
                inv.swap(pivot * n + k, col * n + k);
            }
        }
        let rp = S::one() / p;
        for k in 0..n {
            m[col * n + k] *= rp;
            inv[col * n + k] *= rp;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = m[r * n + col];
            if f == S::zero() {
                continue;
            }
            for k in 0..n {
                let mk = m[col * n + k];
                let ik = inv[col * n + k];
                m[r * n + k] -= f * mk;
                inv[r * n + k] -= f * ik;
            }
        }
    }
    Ok(inv)
}

/// Determinant by LU elimination with partial pivoting.
pub fn det<S: Scalar>(n: usize, a: &[S]) -> S {
    let mut m = a.to_vec();
    let mut d = S::one();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r, &s| m[r * n + col].abs().partial_cmp(&m[s * n + col].abs()).unwrap())
            .unwrap();
        let p = m[pivot * n + col];
        if p == S::zero() {
            return S::zero();
        }
        if pivot != col {
            for k in 0..n {
                m.swap(pivot * n + k, col * n + k);
            }
            d = -d;
        }
        d *= p;
        for r in col + 1..n {
            let f = m[r * n + col] / p;
            for k in col..n {
                let mk = m[col * n + k];
                m[r * n + k] -= f * mk;
            }
        }
    }
    d
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order and the matching eigenvectors as rows.
pub fn symmetric_eigen<S: Scalar>(n: usize, a: &[S]) -> (Vec<S>, Vec<Vec<S>>) {
    let mut m = a.to_vec();
    let mut v = vec![S::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = S::one();
    }
    let two = S::lit(2.0);
    for _sweep in 0..100 {
        let mut off = S::zero();
        let mut diag = S::zero();
        for i in 0..n {
            diag += m[i * n + i] * m[i * n + i];
            for j in i + 1..n {
                off += m[i * n + j] * m[i * n + j];
            }
        }
        if off <= S::epsilon() * S::epsilon() * diag || off == S::zero() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == S::zero() {
                    continue;
                }
                let theta = (m[q * n + q] - m[p * n + p]) / (two * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + S::one()).sqrt());
                let c = S::one() / (t * t + S::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
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
    order.sort_by(|&i, &j| m[i * n + i].partial_cmp(&m[j * n + j]).unwrap());
    let values = order.iter().map(|&i| m[i * n + i]).collect();
    let vectors = order.iter().map(|&i| (0..n).map(|k| v[k * n + i]).collect()).collect();
    (values, vectors)
}

/// Matrix-vector product.
pub fn mat_vec<S: Scalar>(n: usize, a: &[S], x: &[S]) -> Vec<S> {
    (0..n).map(|i| (0..n).map(|j| a[i * n + j] * x[j]).sum()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_round_trip() {
        let a = [4.0, 1.0, 0.5, 1.0, -3.0, 0.2, 0.5, 0.2, 2.0];
        let inv = invert(3, &a).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let e: f64 = (0..3).map(|k| a[i * 3 + k] * inv[k * 3 + j]).sum();
                assert!((e - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let a = [1.0, 2.0, 2.0, 4.0];
        assert!(matches!(invert(2, &a), Err(Error::Singular(_))));
        assert_eq!(det(2, &a), 0.0);
    }

    #[test]
    fn jacobi_recovers_known_spectrum() {
        let a = [2.0f64, 1.0, 0.0, 1.0, 2.0, 0.0, 0.0, 0.0, -5.0];
        let (vals, vecs) = symmetric_eigen(3, &a);
        assert!((vals[0] + 5.0).abs() < 1e-14);
        assert!((vals[1] - 1.0).abs() < 1e-14);
        assert!((vals[2] - 3.0).abs() < 1e-14);
        let av = mat_vec(3, &a, &vecs[2]);
        for k in 0..3 {
            assert!((av[k] - 3.0 * vecs[2][k]).abs() < 1e-13);
        }
        assert!((det(3, &a) + 15.0).abs() < 1e-12);
    }
}
