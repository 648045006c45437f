use std::fmt::{Debug, Display};
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_bigfloat::BigFloat;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Scalar type accepted by the generic numerical core.
///
/// Implemented for `f32`, `f64` and [`BigFloat`] (about 40 significant
/// decimal digits, exponents roughly 1e-128 to 1e166). The wide type is
/// what makes high-order power series usable: converting a degree-36
/// Chebyshev fit to monomials amplifies rounding by roughly `2^72`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Exact for `f64` and `BigFloat`.
    fn lit(v: f64) -> Self;

    fn as_f64(self) -> f64;

    /// Unit roundoff of the type.
    fn precision() -> f64 {
        Self::epsilon().as_f64()
    }

    fn from_int(v: i64) -> Self {
        Self::lit(v as f64)
    }
}

impl Real for f32 {
    fn lit(v: f64) -> Self {
        v as f32
    }

    fn as_f64(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    fn lit(v: f64) -> Self {
        v
    }

    fn as_f64(self) -> f64 {
        self
    }
}

impl Real for BigFloat {
    fn lit(v: f64) -> Self {
        <BigFloat as FromPrimitive>::from_f64(v).unwrap_or(num_bigfloat::NAN)
    }

    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    fn from_int(v: i64) -> Self {
        BigFloat::from_i64(v)
    }

    fn precision() -> f64 {
        1e-39
    }
}

/// Sum with Neumaier compensation.
pub fn compensated_sum<T: Real>(values: impl IntoIterator<Item = T>) -> T {
    let mut sum = T::zero();
    let mut carry = T::zero();
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

/// Sums after sorting by ascending magnitude, with compensation.
pub fn ordered_sum<T: Real>(mut values: Vec<T>) -> T {
    values.sort_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap_or(std::cmp::Ordering::Equal));
    compensated_sum(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    #[test]
    fn bigfloat_roundtrips_f64() {
        for v in [1.0, 0.1, 6.02e23, 1.0e-100, 3.0e14, -2.5e-7] {
            assert_eq!(BigFloat::lit(v).as_f64(), v);
        }
    }

    #[test]
    fn compensated_sum_recovers_cancellation() {
        let s: f64 = compensated_sum([1.0e16, 1.0, -1.0e16]);
        assert_eq!(s, 1.0);
    }

    #[test]
    fn wide_type_has_extra_digits() {
        let third = BigFloat::one() / BigFloat::lit(3.0);
        let err = (third * BigFloat::lit(3.0) - BigFloat::one()).abs();
        assert!(err.as_f64() < 1e-35);
        let ln2 = BigFloat::lit(2.0).ln();
        let back = ln2.exp() - BigFloat::lit(2.0);
        assert!(back.abs().as_f64() < 1e-35);
    }
}
