//! Small dense symmetric-positive-definite kernels. Matrices are row-major
//! `n x n` slices; the dimension here is the dictionary size, so plain loops
//! are all that is needed.

use crate::scalar::Real;

/// Lower Cholesky factor `L` with `A = L Lᵀ`, or `None` if `A` is not
/// numerically positive definite.
pub fn cholesky<T: Real>(a: &[T], n: usize) -> Option<Vec<T>> {
    debug_assert_eq!(a.len(), n * n);
    let mut l = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s = s - l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(s > T::zero()) || !s.is_finite() {
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

/// Solves `L x = b` in place.
pub fn forward_substitute<T: Real>(l: &[T], n: usize, b: &mut [T]) {
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s = s - l[i * n + k] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
}

/// Solves `Lᵀ x = b` in place.
pub fn back_substitute_transposed<T: Real>(l: &[T], n: usize, b: &mut [T]) {
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in (i + 1)..n {
            s = s - l[k * n + i] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
}

/// Solves `A x = b` given the Cholesky factor of `A`.
pub fn cholesky_solve<T: Real>(l: &[T], n: usize, b: &[T]) -> Vec<T> {
    let mut x = b.to_vec();
    forward_substitute(l, n, &mut x);
    back_substitute_transposed(l, n, &mut x);
    x
}

/// `A⁻¹` from the Cholesky factor of `A`, symmetrised.
pub fn cholesky_inverse<T: Real>(l: &[T], n: usize) -> Vec<T> {
    let mut inv = vec![T::zero(); n * n];
    let mut e = vec![T::zero(); n];
    for col in 0..n {
        e.iter_mut().for_each(|v| *v = T::zero());
        e[col] = T::one();
        let x = cholesky_solve(l, n, &e);
        for row in 0..n {
            inv[row * n + col] = x[row];
        }
    }
    let half = T::lit(0.5);
    for i in 0..n {
        for j in (i + 1)..n {
            let s = (inv[i * n + j] + inv[j * n + i]) * half;
            inv[i * n + j] = s;
            inv[j * n + i] = s;
        }
    }
    inv
}
