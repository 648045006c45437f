use crate::error::{Error, Result};
use crate::scalar::{ordered_sum, Real};

/// `n` log-spaced points from `lo` to `hi`, with both endpoints exact.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n)
            .map(|j| match j {
                0 => lo,
                j if j == n - 1 => hi,
                _ => (lo.ln() + (hi.ln() - lo.ln()) * j as f64 / (n - 1) as f64).exp(),
            })
            .collect(),
    }
}

/// Sampled curve `(I0, S)` with strictly increasing positive intensities.
///
/// Also carries probability samples; the column name is chosen at write time.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalCurve<T> {
    points: Vec<(T, T)>,
    label: String,
}

impl<T: Real> SignalCurve<T> {
    pub fn new(points: Vec<(T, T)>, label: impl Into<String>) -> Result<Self> {
        for (j, &(i, s)) in points.iter().enumerate() {
            if !(i > T::zero() && i.is_finite()) {
                return Err(Error::Validation(format!("intensity at index {j} must be positive, got {i}")));
            }
            if !s.is_finite() {
                return Err(Error::Validation(format!("value at index {j} is not finite")));
            }
        }
        if let Some(j) = points.windows(2).position(|w| w[1].0 <= w[0].0) {
            return Err(Error::Validation(format!(
                "intensities must be strictly increasing (index {} -> {})",
                j,
                j + 1
            )));
        }
        Ok(Self { points, label: label.into() })
    }

    pub fn from_samples(intensities: &[T], values: &[T], label: impl Into<String>) -> Result<Self> {
        if intensities.len() != values.len() {
            return Err(Error::Validation(format!("{} intensities but {} values", intensities.len(), values.len())));
        }
        Self::new(intensities.iter().copied().zip(values.iter().copied()).collect(), label)
    }

    pub fn points(&self) -> &[(T, T)] {
        &self.points
    }

    pub fn intensities(&self) -> Vec<T> {
        self.points.iter().map(|p| p.0).collect()
    }

    pub fn values(&self) -> Vec<T> {
        self.points.iter().map(|p| p.1).collect()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Converts through `f64`; exact when widening from `f64`.
    pub fn cast<U: Real>(&self) -> SignalCurve<U> {
        SignalCurve {
            points: self.points.iter().map(|&(i, s)| (U::lit(i.as_f64()), U::lit(s.as_f64()))).collect(),
            label: self.label.clone(),
        }
    }
}

/// `x^(m-1) sum_k c_k x^k` with `x = I / reference_intensity`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSeries<T> {
    m: i32,
    coefficients: Vec<T>,
    reference_intensity: T,
}

impl<T: Real> PowerSeries<T> {
    pub fn new(m: i32, coefficients: Vec<T>, reference_intensity: T) -> Result<Self> {
        if !(reference_intensity > T::zero() && reference_intensity.is_finite()) {
            return Err(Error::Domain(format!("reference intensity must be positive, got {reference_intensity}")));
        }
        Ok(Self { m, coefficients, reference_intensity })
    }

    pub fn m(&self) -> i32 {
        self.m
    }

    pub fn coefficients(&self) -> &[T] {
        &self.coefficients
    }

    pub fn reference_intensity(&self) -> T {
        self.reference_intensity
    }

    pub fn k_max(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }

    pub fn evaluate(&self, intensity: T) -> Result<T> {
        if !(intensity > T::zero()) {
            return Err(Error::Domain(format!("intensity must be positive, got {intensity}")));
        }
        Ok(self.evaluate_normalized(intensity / self.reference_intensity))
    }

    /// Evaluates at `x`, summing terms in ascending magnitude.
    pub fn evaluate_normalized(&self, x: T) -> T {
        let mut power = T::one();
        let mut terms = Vec::with_capacity(self.coefficients.len());
        for &c in &self.coefficients {
            terms.push(c * power);
            power *= x;
        }
        x.powi(self.m - 1) * ordered_sum(terms)
    }
}

/// Reconstructed probability samples, with the generating series when the
/// reconstruction has one.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityCurve<T> {
    pub samples: SignalCurve<T>,
    pub series: Option<PowerSeries<T>>,
}

impl<T: Real> ProbabilityCurve<T> {
    pub fn points(&self) -> &[(T, T)] {
        self.samples.points()
    }

    pub fn probabilities(&self) -> Vec<T> {
        self.samples.values()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Wide;
    use num_traits::{One, Zero};

    #[test]
    fn validates_curves() {
        assert!(SignalCurve::new(vec![(1.0, 0.0), (2.0, -1.0)], "s").is_ok());
        assert!(SignalCurve::new(vec![(1.0, 0.0), (1.0, 1.0)], "s").is_err());
        assert!(SignalCurve::new(vec![(0.0, 0.0)], "s").is_err());
        assert!(SignalCurve::new(vec![(1.0, f64::NAN)], "s").is_err());
        assert!(SignalCurve::<f64>::new(vec![], "s").unwrap().is_empty());
    }

    #[test]
    fn evaluation_examples() {
        let zero = PowerSeries::new(2, vec![0.0; 5], 1e14).unwrap();
        assert_eq!(zero.evaluate(3e13).unwrap(), 0.0);
        let one = PowerSeries::new(1, vec![1.0], 1e14).unwrap();
        assert_eq!(one.evaluate(1e14).unwrap(), 1.0);
        let s = PowerSeries::new(3, vec![2.0], 1e14).unwrap();
        assert_eq!(s.evaluate(5e13).unwrap(), 0.5);
        assert!(s.evaluate(0.0).is_err());
        assert!(PowerSeries::new(1, vec![1.0], 0.0).is_err());
    }

    #[test]
    fn wide_cancellation() {
        // (1 - x)^20 expanded: coefficients up to 1.8e5 cancel to 1e-20.
        let mut c = vec![Wide::one()];
        for _ in 0..20 {
            let mut next = vec![Wide::zero(); c.len() + 1];
            for (k, &v) in c.iter().enumerate() {
                next[k] += v;
                next[k + 1] -= v;
            }
            c = next;
        }
        let s = PowerSeries::new(1, c, Wide::one()).unwrap();
        let v = s.evaluate_normalized(Wide::lit(0.1)).as_f64();
        assert!((v - 0.9f64.powi(20)).abs() < 1e-15);
        let v = s.evaluate_normalized(Wide::lit(0.9)).as_f64();
        assert!((v - 1e-20).abs() < 1e-33);
    }
}
