//! Natural cubic spline, generic over the scalar type.

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone)]
pub struct CubicSpline<T> {
    x: Vec<T>,
    y: Vec<T>,
    /// Second derivatives at the knots.
    m: Vec<T>,
}

impl<T: Real> CubicSpline<T> {
    /// Natural spline through `(x, y)`; `x` must be strictly increasing.
    pub fn natural(x: Vec<T>, y: Vec<T>) -> Result<Self> {
        let n = x.len();
        if n < 2 || y.len() != n {
            return Err(Error::Domain(format!("spline needs at least 2 matching knots, got {n}")));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Validation("spline knots must be strictly increasing".into()));
        }
        let two = T::lit(2.0);
        let six = T::lit(6.0);
        let mut m = vec![T::zero(); n];
        if n > 2 {
            // Thomas algorithm on the interior equations.
            let k = n - 2;
            let mut diag = vec![T::zero(); k];
            let mut rhs = vec![T::zero(); k];
            let mut upper = vec![T::zero(); k];
            for i in 0..k {
                let h0 = x[i + 1] - x[i];
                let h1 = x[i + 2] - x[i + 1];
                diag[i] = two * (h0 + h1);
                upper[i] = h1;
                rhs[i] = six * ((y[i + 2] - y[i + 1]) / h1 - (y[i + 1] - y[i]) / h0);
            }
            for i in 1..k {
                let lower = x[i + 1] - x[i];
                let w = lower / diag[i - 1];
                diag[i] -= w * upper[i - 1];
                rhs[i] = rhs[i] - w * rhs[i - 1];
            }
            m[k] = rhs[k - 1] / diag[k - 1];
            for i in (0..k - 1).rev() {
                m[i + 1] = (rhs[i] - upper[i] * m[i + 2]) / diag[i];
            }
        }
        Ok(Self { x, y, m })
    }

    fn segment(&self, t: T) -> usize {
        let n = self.x.len();
        match self.x.binary_search_by(|v| v.partial_cmp(&t).unwrap_or(std::cmp::Ordering::Less)) {
            Ok(i) => i.min(n - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(n - 2),
        }
    }

    fn parts(&self, t: T) -> (usize, T, T, T) {
        let i = self.segment(t);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        (i, h, a, b)
    }

    pub fn eval(&self, t: T) -> T {
        let (i, h, a, b) = self.parts(t);
        if b == T::zero() {
            return self.y[i];
        }
        if a == T::zero() {
            return self.y[i + 1];
        }
        let six = T::lit(6.0);
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / six
    }

    pub fn derivative(&self, t: T) -> T {
        let (i, h, a, b) = self.parts(t);
        let three = T::lit(3.0);
        let six = T::lit(6.0);
        (self.y[i + 1] - self.y[i]) / h - (three * a * a - T::one()) * h / six * self.m[i]
            + (three * b * b - T::one()) * h / six * self.m[i + 1]
    }

    pub fn second_derivative(&self, t: T) -> T {
        let (i, _, a, b) = self.parts(t);
        a * self.m[i] + b * self.m[i + 1]
    }

    pub fn knots(&self) -> &[T] {
        &self.x
    }
}
