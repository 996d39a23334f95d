//! Small dense matrix routines on row-major `n × n` slices.

use num_traits::{Float, Zero};

use crate::scalar::{Real, Scalar};

/// Gauss-Jordan inverse with partial pivoting on point values.
///
/// Works for any [`Scalar`], so a matrix of jets inverts to a matrix of jets.
/// Returns `None` when a pivot falls below `rel_floor` times the largest
/// entry.
pub fn invert<T: Scalar>(m: &[T], n: usize, rel_floor: f64) -> Option<Vec<T>> {
    assert_eq!(m.len(), n * n);
    let scale = m
        .iter()
        .map(|v| v.value().to_f64_lossy().abs())
        .fold(0.0, f64::max);
    if scale == 0.0 || !scale.is_finite() {
        return None;
    }
    let mut a = m.to_vec();
    let zero = m[0].zero_like();
    let one = m[0].lift_f64(1.0);
    let mut inv: Vec<T> = (0..n * n)
        .map(|k| if k / n == k % n { one.clone() } else { zero.clone() })
        .collect();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r, &s| {
                let vr = a[r * n + col].value().abs();
                let vs = a[s * n + col].value().abs();
                vr.partial_cmp(&vs).unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap();
        if a[pivot_row * n + col].value().to_f64_lossy().abs() <= rel_floor * scale {
            return None;
        }
        if pivot_row != col {
            for k in 0..n {
                a.swap(pivot_row * n + k, col * n + k);
                inv.swap(pivot_row * n + k, col * n + k);
            }
        }
        let p = a[col * n + col].clone();
        for k in 0..n {
            a[col * n + k] = a[col * n + k].clone() / p.clone();
            inv[col * n + k] = inv[col * n + k].clone() / p.clone();
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = a[r * n + col].clone();
            if f.value().is_zero() && f.is_constant() {
                continue;
            }
            for k in 0..n {
                a[r * n + k] = a[r * n + k].clone() - f.clone() * a[col * n + k].clone();
                inv[r * n + k] = inv[r * n + k].clone() - f.clone() * inv[col * n + k].clone();
            }
        }
    }
    Some(inv)
}

/// Lower Cholesky factor `L` with `m = L Lᵀ`, or `None` if not positive definite.
pub fn cholesky<S: Real>(m: &[S], n: usize) -> Option<Vec<S>> {
    let mut l = vec![S::zero(); n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = m[i * n + j];
            for k in 0..j {
                s = s - l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= S::zero() {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Some(l)
}

/// Inverse of a lower-triangular matrix.
pub fn invert_lower<S: Real>(l: &[S], n: usize) -> Vec<S> {
    let mut inv = vec![S::zero(); n * n];
    for c in 0..n {
        for i in c..n {
            let mut s = if i == c { S::one() } else { S::zero() };
            for k in c..i {
                s = s - l[i * n + k] * inv[k * n + c];
            }
            inv[i * n + c] = s / l[i * n + i];
        }
    }
    inv
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order and the matching eigenvectors as
/// columns of a row-major matrix.
pub fn symmetric_eigen<S: Real>(m: &[S], n: usize) -> (Vec<S>, Vec<S>) {
    let mut a = m.to_vec();
    let mut v = vec![S::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = S::one();
    }
    let two = S::of(2.0);
    for _sweep in 0..100 {
        let mut off = S::zero();
        let mut total = S::zero();
        for i in 0..n {
            for j in 0..n {
                let sq = a[i * n + j] * a[i * n + j];
                total = total + sq;
                if i != j {
                    off = off + sq;
                }
            }
        }
        if off <= S::epsilon() * S::epsilon() * total || off.is_zero() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.is_zero() {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (two * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + S::one()).sqrt());
                let c = S::one() / (t * t + S::one()).sqrt();
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
        a[i * n + i]
            .partial_cmp(&a[j * n + j])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vectors = vec![S::zero(); n * n];
    for (col, &src) in order.iter().enumerate() {
        for r in 0..n {
            vectors[r * n + col] = v[r * n + src];
        }
    }
    (values, vectors)
}

pub fn matmul<S: Real>(a: &[S], b: &[S], n: usize) -> Vec<S> {
    let mut c = vec![S::zero(); n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            for j in 0..n {
                c[i * n + j] = c[i * n + j] + aik * b[k * n + j];
            }
        }
    }
    c
}

pub fn transpose<S: Copy>(a: &[S], n: usize) -> Vec<S> {
    let mut t = a.to_vec();
    for i in 0..n {
        for j in 0..n {
            t[j * n + i] = a[i * n + j];
        }
    }
    t
}

/// Largest absolute entry.
pub fn max_abs<S: Real>(a: &[S]) -> S {
    a.iter().fold(S::zero(), |m, v| Float::max(m, v.abs()))
}

pub fn identity<S: Real>(n: usize) -> Vec<S> {
    let mut m = vec![S::zero(); n * n];
    for i in 0..n {
        m[i * n + i] = S::one();
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::jet_seed;
    use approx::assert_relative_eq;

    #[test]
    fn inverse_round_trip() {
        let m = [4.0, 1.0, 0.5, 1.0, 3.0, -0.2, 0.5, -0.2, 2.0];
        let inv = invert(&m, 3, 1e-14).unwrap();
        let p = matmul(&m, &inv, 3);
        for (a, b) in p.iter().zip(identity::<f64>(3)) {
            assert_relative_eq!(*a, b, epsilon = 1e-14);
        }
        assert!(invert(&[1.0, 2.0, 2.0, 4.0], 2, 1e-12).is_none());
    }

    #[test]
    fn inverse_of_jet_matrix_differentiates() {
        // d/dt (1/(2+t)) at t=0 = -1/4
        let t = &jet_seed(&[0.0], 3)[0];
        let m = vec![
            t.lift(2.0) + t.clone(),
            t.lift(0.0),
            t.lift(0.0),
            t.lift(1.0),
        ];
        let inv = invert(&m, 2, 1e-14).unwrap();
        assert_relative_eq!(inv[0].partial(&[1]).unwrap(), -0.25, epsilon = 1e-15);
        assert_relative_eq!(inv[0].partial(&[2]).unwrap(), 2.0 / 8.0, epsilon = 1e-15);
    }

    #[test]
    fn cholesky_and_eigen() {
        let m = [2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 2.0];
        let l = cholesky(&m, 3).unwrap();
        let llt = matmul(&l, &transpose(&l, 3), 3);
        for (a, b) in llt.iter().zip(&m) {
            assert_relative_eq!(*a, *b, epsilon = 1e-14);
        }
        let li = invert_lower(&l, 3);
        let id = matmul(&l, &li, 3);
        for (a, b) in id.iter().zip(identity::<f64>(3)) {
            assert_relative_eq!(*a, b, epsilon = 1e-14);
        }
        let (vals, vecs) = symmetric_eigen(&m, 3);
        let s2 = 2f64.sqrt();
        assert_relative_eq!(vals[0], 2.0 - s2, epsilon = 1e-13);
        assert_relative_eq!(vals[1], 2.0, epsilon = 1e-13);
        assert_relative_eq!(vals[2], 2.0 + s2, epsilon = 1e-13);
        // A v = λ v for every column
        for c in 0..3 {
            for r in 0..3 {
                let av: f64 = (0..3).map(|k| m[r * 3 + k] * vecs[k * 3 + c]).sum();
                assert_relative_eq!(av, vals[c] * vecs[r * 3 + c], epsilon = 1e-12);
            }
        }
        assert!(cholesky(&[1.0, 2.0, 2.0, 1.0], 2).is_none());
    }
}
