//! Dense least squares by Householder QR, generic over the scalar type.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: T) {
        self.data[r * self.cols + c] = v;
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.rows)
            .map(|r| {
                let mut acc = T::zero();
                for c in 0..self.cols {
                    acc += self.get(r, c) * x[c];
                }
                acc
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct LeastSquares<T> {
    pub solution: Vec<T>,
    pub residual_norm: T,
    /// `max |R_ii| / min |R_ii|`, a cheap lower bound on the condition number.
    pub diagonal_ratio: f64,
}

/// Minimizes `|A x - b|_2` for a tall matrix with full column rank.
pub fn least_squares<T: Real>(a: &Matrix<T>, b: &[T]) -> Result<LeastSquares<T>> {
    let (m, n) = (a.rows, a.cols);
    if b.len() != m {
        return Err(Error::Validation(format!("right-hand side has {} rows, matrix {m}", b.len())));
    }
    if m < n {
        return Err(Error::Underdetermined { unknowns: n, points: m });
    }
    // Column-major copy so each Householder sweep walks contiguous memory.
    let mut q: Vec<Vec<T>> = (0..n).map(|c| (0..m).map(|r| a.get(r, c)).collect()).collect();
    let mut rhs = b.to_vec();
    let mut diag = vec![T::zero(); n];
    for j in 0..n {
        let norm = q[j][j..].iter().fold(T::zero(), |acc, &v| acc + v * v).sqrt();
        if norm == T::zero() {
            return Err(Error::Numerical(format!("design matrix column {j} is rank deficient")));
        }
        let alpha = if q[j][j] > T::zero() { -norm } else { norm };
        // v = x - alpha e1, stored in place; beta = 1/(v.v/2) = 1/(alpha (alpha - x0)).
        let v0 = q[j][j] - alpha;
        q[j][j] = v0;
        let beta = (-(alpha * v0)).recip();
        let (head, tail) = q.split_at_mut(j + 1);
        let v = &head[j][j..];
        for col in tail.iter_mut() {
            let mut s = T::zero();
            for (vi, ci) in v.iter().zip(&col[j..]) {
                s += *vi * *ci;
            }
            let s = s * beta;
            for (vi, ci) in v.iter().zip(col[j..].iter_mut()) {
                *ci -= s * *vi;
            }
        }
        let mut s = T::zero();
        for (vi, ri) in v.iter().zip(&rhs[j..]) {
            s += *vi * *ri;
        }
        let s = s * beta;
        for (vi, ri) in v.iter().zip(rhs[j..].iter_mut()) {
            *ri -= s * *vi;
        }
        diag[j] = alpha;
    }
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let mut acc = rhs[i];
        for c in i + 1..n {
            acc -= q[c][i] * x[c];
        }
        x[i] = acc / diag[i];
    }
    let residual_norm = rhs[n..].iter().fold(T::zero(), |acc, &v| acc + v * v).sqrt();
    let abs: Vec<f64> = diag.iter().map(|d| d.abs().as_f64()).collect();
    let hi = abs.iter().cloned().fold(0.0, f64::max);
    let lo = abs.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(LeastSquares { solution: x, residual_norm, diagonal_ratio: hi / lo })
}
