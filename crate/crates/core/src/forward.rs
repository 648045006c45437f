//! Spatial averaging: `S(I0) = int_0^1 K(xi) P(xi I0) dxi`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{coefficient_closed_with, integrate_in_log_ratio, CoefficientMode, Geometry};
use crate::scalar::Real;
use crate::series::{PowerSeries, SignalCurve};

/// Averages a probability series term by term: `A_k = G_k B_k`.
pub fn average_series<T: Real>(prob: &PowerSeries<T>, geometry: Geometry) -> Result<PowerSeries<T>> {
    average_series_with(prob, geometry, CoefficientMode::Strict)
}

/// As [`average_series`]. Zero coefficients at excluded indices are allowed.
pub fn average_series_with<T: Real>(
    prob: &PowerSeries<T>,
    geometry: Geometry,
    mode: CoefficientMode,
) -> Result<PowerSeries<T>> {
    let mut out = Vec::with_capacity(prob.coefficients().len());
    for (k, &b) in prob.coefficients().iter().enumerate() {
        if b == T::zero() {
            out.push(T::zero());
            continue;
        }
        let g: T = coefficient_closed_with(geometry, prob.m(), k as u32, mode)?;
        out.push(g * b);
    }
    PowerSeries::new(prob.m(), out, prob.reference_intensity())
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureFailure {
    pub index: usize,
    pub intensity: f64,
    pub estimate: f64,
    pub abs_error: f64,
}

/// Result of [`average_quadrature`]: every grid point, plus the points whose
/// integral missed the tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct AveragedCurve {
    pub curve: SignalCurve<f64>,
    pub failures: Vec<QuadratureFailure>,
}

impl AveragedCurve {
    /// The curve, or an accuracy error if any point failed.
    pub fn into_curve(self) -> Result<SignalCurve<f64>> {
        match self.failures.first() {
            None => Ok(self.curve),
            Some(f) => Err(Error::Accuracy(format!(
                "{} grid point(s) unconverged, first at I0 = {:e} (estimate {:e} +/- {:e})",
                self.failures.len(),
                f.intensity,
                f.estimate,
                f.abs_error
            ))),
        }
    }
}

/// Averages an arbitrary probability function by adaptive quadrature.
///
/// `rel_tol` is relative to `int K |P|`, which equals `|S|` for nonnegative
/// probabilities. Grid points are evaluated in parallel; results do not
/// depend on scheduling.
pub fn average_quadrature<F>(prob: F, geometry: Geometry, grid: &[f64], rel_tol: f64) -> Result<AveragedCurve>
where
    F: Fn(f64) -> f64 + Sync,
{
    if !(rel_tol > 0.0) {
        return Err(Error::Validation(format!("rel_tol must be positive, got {rel_tol}")));
    }
    let template = SignalCurve::new(grid.iter().map(|&i| (i, 0.0)).collect(), "")?;
    let results: Vec<_> =
        grid.par_iter().map(|&peak| integrate_in_log_ratio(geometry, |u| prob(peak * (-u).exp()), rel_tol)).collect();
    let mut failures = Vec::new();
    for (index, (r, &intensity)) in results.iter().zip(grid).enumerate() {
        if !r.converged {
            failures.push(QuadratureFailure { index, intensity, estimate: r.value, abs_error: r.abs_error });
        }
    }
    let values: Vec<f64> = results.iter().map(|r| r.value).collect();
    let curve = SignalCurve::from_samples(&template.intensities(), &values, format!("{geometry}-averaged"))?;
    Ok(AveragedCurve { curve, failures })
}
