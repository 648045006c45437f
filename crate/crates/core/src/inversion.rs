//! MPE inversion: resample, fit `S = x^(m-1) sum A_k x^k`, divide by `G_k`.
//! Also the derivative-based ISS reference inverter.

use std::fmt;
use std::str::FromStr;

use log::warn;

use crate::error::{Error, Result};
use crate::geometry::{build_coefficients, CoefficientMode, Geometry, VolumetricCoefficients};
use crate::linalg::{least_squares, Matrix};
use crate::scalar::{compensated_sum, Real};
use crate::series::{PowerSeries, ProbabilityCurve, SignalCurve};
use crate::spline::CubicSpline;

/// Base residual weights of the fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightScheme {
    Uniform,
    /// `1/|S|`: balances relative errors; suited to multiplicative noise.
    Relative,
    /// `1/max(|dS/d ln I0|, floor * max)`: balances the errors of the
    /// recovered probability, which is roughly proportional to that slope.
    Slope {
        floor: f64,
    },
}

impl Default for WeightScheme {
    fn default() -> Self {
        WeightScheme::Slope { floor: 1e-4 }
    }
}

impl fmt::Display for WeightScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightScheme::Uniform => f.write_str("uniform"),
            WeightScheme::Relative => f.write_str("relative"),
            WeightScheme::Slope { .. } => f.write_str("slope"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Weighting {
    pub scheme: WeightScheme,
    /// Extra factor applied above the signal's knee.
    pub post_saturation: Option<f64>,
}

/// Coordinates of the resampling spline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SplineSpace {
    /// `(ln I0, ln S)`; requires `S > 0`.
    #[default]
    LogLog,
    /// `(ln I0, S)`; accepts any sign.
    Linear,
}

impl FromStr for SplineSpace {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "log" | "loglog" => Ok(SplineSpace::LogLog),
            "linear" => Ok(SplineSpace::Linear),
            _ => Err(Error::Validation(format!("unknown spline space '{s}', expected log or linear"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InversionConfig {
    pub m: i32,
    pub k_max: u32,
    pub spline_factor: u32,
    pub weighting: Weighting,
    /// Ridge strength relative to the mean squared column norm.
    pub ridge: f64,
    pub mode: CoefficientMode,
    pub spline_space: SplineSpace,
}

impl InversionConfig {
    pub fn new(m: i32, k_max: u32) -> Self {
        Self {
            m,
            k_max,
            spline_factor: 10,
            weighting: Weighting::default(),
            ridge: 0.0,
            mode: CoefficientMode::Strict,
            spline_space: SplineSpace::LogLog,
        }
    }

    pub fn with_mode(mut self, mode: CoefficientMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_spline_factor(mut self, factor: u32) -> Self {
        self.spline_factor = factor;
        self
    }

    pub fn with_scheme(mut self, scheme: WeightScheme) -> Self {
        self.weighting.scheme = scheme;
        self
    }

    pub fn with_post_saturation(mut self, ratio: f64) -> Self {
        self.weighting.post_saturation = Some(ratio);
        self
    }

    pub fn with_ridge(mut self, ridge: f64) -> Self {
        self.ridge = ridge;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.spline_factor < 1 {
            return Err(Error::Validation("spline factor must be at least 1".into()));
        }
        if !(self.ridge >= 0.0 && self.ridge.is_finite()) {
            return Err(Error::Validation(format!("ridge must be nonnegative, got {}", self.ridge)));
        }
        if let Some(r) = self.weighting.post_saturation {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::Validation(format!("post-saturation ratio must be positive, got {r}")));
            }
        }
        if let WeightScheme::Slope { floor } = self.weighting.scheme {
            if !(floor > 0.0 && floor < 1.0) {
                return Err(Error::Validation(format!("slope weight floor must lie in (0, 1), got {floor}")));
            }
        }
        Ok(())
    }

    /// [`validate`](Self::validate) plus the per-geometry lower bound on `m`.
    /// The 3D bound holds in either mode.
    pub fn validate_for(&self, geometry: Geometry) -> Result<()> {
        self.validate()?;
        if let Some(min) = geometry.min_m() {
            if self.m < min && (self.mode == CoefficientMode::Strict || geometry == Geometry::ThreeD) {
                return Err(Error::Restriction(format!(
                    "{geometry} inversions require m >= {min}, got m = {}",
                    self.m
                )));
            }
        }
        Ok(())
    }
}

/// Cubic-spline resampling with `factor - 1` new points per interval.
/// Original points are copied unchanged.
pub fn resample_spline<T: Real>(curve: &SignalCurve<T>, factor: u32, space: SplineSpace) -> Result<SignalCurve<T>> {
    if factor < 1 {
        return Err(Error::Validation("spline factor must be at least 1".into()));
    }
    if factor == 1 {
        return Ok(curve.clone());
    }
    if curve.len() < 4 {
        return Err(Error::Domain(format!("resampling needs at least 4 points, got {}", curve.len())));
    }
    let u: Vec<T> = curve.intensities().iter().map(|i| i.ln()).collect();
    let s = curve.values();
    let y = match space {
        SplineSpace::LogLog => {
            if let Some(j) = s.iter().position(|v| *v <= T::zero()) {
                return Err(Error::Domain(format!(
                    "log-log resampling needs positive signal (index {j} is {}); use the linear spline space",
                    s[j]
                )));
            }
            s.iter().map(|v| v.ln()).collect()
        }
        SplineSpace::Linear => s.clone(),
    };
    let spline = CubicSpline::natural(u.clone(), y)?;
    let f = T::from_int(factor as i64);
    let mut points = Vec::with_capacity((curve.len() - 1) * factor as usize + 1);
    for j in 0..curve.len() - 1 {
        points.push(curve.points()[j]);
        for t in 1..factor {
            let uu = u[j] + (u[j + 1] - u[j]) * T::from_int(t as i64) / f;
            let v = spline.eval(uu);
            let v = match space {
                SplineSpace::LogLog => v.exp(),
                SplineSpace::Linear => v,
            };
            points.push((uu.exp(), v));
        }
    }
    points.push(*curve.points().last().expect("nonempty"));
    SignalCurve::new(points, curve.label())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitDiagnostics {
    /// Weighted residual norm over weighted signal norm.
    pub relative_residual: f64,
    /// Diagonal ratio of the triangular factor.
    pub condition: f64,
    /// Sign changes of the unweighted residual along the grid.
    pub residual_sign_changes: usize,
    /// l1 norm of the monomial coefficients over that of the Chebyshev ones.
    pub conversion_amplification: f64,
    pub knee_intensity: Option<f64>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesFit<T> {
    pub series: PowerSeries<T>,
    pub chebyshev: Vec<T>,
    pub diagnostics: FitDiagnostics,
}

/// Monomial coefficients of the shifted Chebyshev polynomials `T_j(2x-1)`.
fn shifted_chebyshev_monomials<T: Real>(degree: usize) -> Vec<Vec<T>> {
    let mut rows: Vec<Vec<T>> = vec![vec![T::one()]];
    if degree >= 1 {
        rows.push(vec![-T::one(), T::lit(2.0)]);
    }
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    for j in 1..degree {
        let mut next = vec![T::zero(); j + 2];
        for (k, &c) in rows[j].iter().enumerate() {
            next[k + 1] += four * c;
            next[k] -= two * c;
        }
        for (k, &c) in rows[j - 1].iter().enumerate() {
            next[k] -= c;
        }
        rows.push(next);
    }
    rows
}

fn chebyshev_row<T: Real>(x: T, degree: usize) -> Vec<T> {
    let y = T::lit(2.0) * x - T::one();
    let mut out = Vec::with_capacity(degree + 1);
    out.push(T::one());
    if degree >= 1 {
        out.push(y);
    }
    for j in 1..degree {
        let next = T::lit(2.0) * y * out[j] - out[j - 1];
        out.push(next);
    }
    out
}

fn to_monomial<T: Real>(cheb: &[T]) -> (Vec<T>, f64) {
    let degree = cheb.len() - 1;
    let table = shifted_chebyshev_monomials::<T>(degree);
    let coeffs: Vec<T> = (0..=degree).map(|k| compensated_sum((k..=degree).map(|j| cheb[j] * table[j][k]))).collect();
    let l1 = |v: &[T]| v.iter().map(|c| c.abs().as_f64()).sum::<f64>();
    let denom = l1(cheb);
    let amp = if denom > 0.0 { l1(&coeffs) / denom } else { 1.0 };
    (coeffs, amp)
}

/// Intensity of the most negative curvature of `ln S` against `ln I0`.
fn knee<T: Real>(curve: &SignalCurve<T>) -> Result<T> {
    let s = curve.values();
    if s.iter().any(|v| *v <= T::zero()) {
        return Err(Error::Validation("post-saturation weighting needs a positive signal".into()));
    }
    let u: Vec<T> = curve.intensities().iter().map(|i| i.ln()).collect();
    let spline = CubicSpline::natural(u.clone(), s.iter().map(|v| v.ln()).collect())?;
    let mut best = (T::infinity(), u[0]);
    for &uu in &u {
        let c = spline.second_derivative(uu);
        if c < best.0 {
            best = (c, uu);
        }
    }
    Ok(best.1.exp())
}

fn base_weights<T: Real>(curve: &SignalCurve<T>, scheme: WeightScheme) -> Result<Vec<T>> {
    let s = curve.values();
    let tiny = T::lit(1e-300);
    Ok(match scheme {
        WeightScheme::Uniform => vec![T::one(); s.len()],
        WeightScheme::Relative => {
            let top = s.iter().fold(T::zero(), |a, v| a.max(v.abs()));
            let floor = (top * T::lit(1e-12)).max(tiny);
            s.iter().map(|v| v.abs().max(floor).recip()).collect()
        }
        WeightScheme::Slope { floor } => {
            if s.len() < 2 {
                return Ok(vec![T::one(); s.len()]);
            }
            let u: Vec<T> = curve.intensities().iter().map(|i| i.ln()).collect();
            let spline = CubicSpline::natural(u.clone(), s)?;
            let slopes: Vec<T> = u.iter().map(|&x| spline.derivative(x).abs()).collect();
            let top = slopes.iter().fold(T::zero(), |a, v| a.max(*v));
            let floor = (top * T::lit(floor)).max(tiny);
            slopes.iter().map(|v| v.max(floor).recip()).collect()
        }
    })
}

/// Weighted least-squares fit of `S` by `x^(m-1) sum_k A_k x^k`, `x = I0/max I0`.
///
/// Solved in the shifted Chebyshev basis and converted to monomials with
/// compensated sums. The conversion amplifies rounding by up to `2^(2 k_max)`,
/// so high orders need a wide scalar type.
pub fn fit_series<T: Real>(curve: &SignalCurve<T>, config: &InversionConfig) -> Result<SeriesFit<T>> {
    config.validate()?;
    let n = curve.len();
    let unknowns = config.k_max as usize + 1;
    if n == 0 {
        return Err(Error::Validation("cannot fit an empty curve".into()));
    }
    if n < unknowns {
        return Err(Error::Underdetermined { unknowns, points: n });
    }
    let i_ref = curve.points()[n - 1].0;
    let xs: Vec<T> = curve.intensities().iter().map(|&i| i / i_ref).collect();
    let s = curve.values();

    let mut w = base_weights(curve, config.weighting.scheme)?;
    let mut knee_intensity = None;
    if let Some(ratio) = config.weighting.post_saturation {
        let k = knee(curve)?;
        knee_intensity = Some(k.as_f64());
        let r = T::lit(ratio);
        for (wj, &(i, _)) in w.iter_mut().zip(curve.points()) {
            if i > k {
                *wj *= r;
            }
        }
    }
    let wmax = w.iter().fold(T::zero(), |a, v| a.max(*v));
    for wj in w.iter_mut() {
        *wj /= wmax;
    }
    let s_scale = s.iter().fold(T::zero(), |a, v| a.max(v.abs()));
    let degree = config.k_max as usize;
    let mut warnings = Vec::new();

    if s_scale == T::zero() {
        let series = PowerSeries::new(config.m, vec![T::zero(); unknowns], i_ref)?;
        return Ok(SeriesFit {
            series,
            chebyshev: vec![T::zero(); unknowns],
            diagnostics: FitDiagnostics {
                relative_residual: 0.0,
                condition: 1.0,
                residual_sign_changes: 0,
                conversion_amplification: 1.0,
                knee_intensity,
                warnings,
            },
        });
    }

    let basis: Vec<Vec<T>> = xs
        .iter()
        .map(|&x| {
            let lead = x.powi(config.m - 1);
            chebyshev_row(x, degree).into_iter().map(|t| lead * t).collect()
        })
        .collect();
    let extra = if config.ridge > 0.0 { unknowns } else { 0 };
    let mut a = Matrix::zeros(n + extra, unknowns);
    let mut b = vec![T::zero(); n + extra];
    for j in 0..n {
        for c in 0..unknowns {
            a.set(j, c, w[j] * basis[j][c]);
        }
        b[j] = w[j] * s[j] / s_scale;
    }
    if extra > 0 {
        let mut frob = T::zero();
        for j in 0..n {
            for c in 0..unknowns {
                frob += a.get(j, c) * a.get(j, c);
            }
        }
        let lambda = (T::lit(config.ridge) * frob / T::from_int(unknowns as i64)).sqrt();
        for c in 0..unknowns {
            a.set(n + c, c, lambda);
        }
    }
    let ls = least_squares(&a, &b)?;
    if ls.diagonal_ratio > 1e12 && config.ridge == 0.0 {
        let msg = format!("catastrophic conditioning (diagonal ratio {:.2e}); consider ridge", ls.diagonal_ratio);
        warn!("{msg}");
        warnings.push(msg);
    }
    let cheb: Vec<T> = ls.solution.iter().map(|&c| c * s_scale).collect();

    let mut num = T::zero();
    let mut den = T::zero();
    let mut signs = 0usize;
    let mut last = 0i8;
    for j in 0..n {
        let fit = compensated_sum(basis[j].iter().zip(&cheb).map(|(&p, &c)| p * c));
        let r = s[j] - fit;
        num += (w[j] * r) * (w[j] * r);
        den += (w[j] * s[j]) * (w[j] * s[j]);
        let sign = if r > T::zero() {
            1
        } else if r < T::zero() {
            -1
        } else {
            0
        };
        if sign != 0 {
            if last != 0 && sign != last {
                signs += 1;
            }
            last = sign;
        }
    }
    let relative_residual = (num / den).sqrt().as_f64();

    let (coeffs, amp) = to_monomial(&cheb);
    let eps = T::precision();
    if amp * eps > 1e-8 {
        let msg =
            format!("monomial conversion amplifies rounding by {amp:.2e}; use a wider scalar type or lower order");
        warn!("{msg}");
        warnings.push(msg);
    }
    Ok(SeriesFit {
        series: PowerSeries::new(config.m, coeffs, i_ref)?,
        chebyshev: cheb,
        diagnostics: FitDiagnostics {
            relative_residual,
            condition: ls.diagonal_ratio,
            residual_sign_changes: signs,
            conversion_amplification: amp,
            knee_intensity,
            warnings,
        },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct InversionDiagnostics {
    pub fit: FitDiagnostics,
    pub excluded: Vec<usize>,
    pub negative_samples: usize,
    /// Largest negative value relative to the largest positive one.
    pub negative_excursion: f64,
    /// Sign changes among samples above 1% of the peak magnitude.
    pub sign_changes: usize,
    /// Set when the recovery dips well below zero or changes sign repeatedly.
    pub oscillatory: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MpeInversion<T> {
    pub probability: ProbabilityCurve<T>,
    pub signal_series: PowerSeries<T>,
    pub coefficients: VolumetricCoefficients<T>,
    pub diagnostics: InversionDiagnostics,
}

fn shape_diagnostics<T: Real>(p: &[T]) -> (usize, f64, usize, bool) {
    let negative = p.iter().filter(|v| **v < T::zero()).count();
    let hi = p.iter().map(|v| v.as_f64()).fold(0.0, f64::max);
    let lo = p.iter().map(|v| v.as_f64()).fold(0.0, f64::min);
    let peak = hi.max(-lo);
    let excursion = if hi > 0.0 {
        -lo / hi
    } else if lo < 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    let mut changes = 0;
    let mut last = 0i8;
    for v in p.iter().map(|v| v.as_f64()) {
        if v.abs() < 1e-2 * peak {
            continue;
        }
        let sign = if v > 0.0 { 1 } else { -1 };
        if last != 0 && sign != last {
            changes += 1;
        }
        last = sign;
    }
    let oscillatory = excursion > 0.05 || changes >= 2;
    (negative, excursion, changes, oscillatory)
}

/// Full MPE pipeline; the result is reported on the input grid.
pub fn mpe_invert<T: Real>(
    curve: &SignalCurve<T>,
    geometry: Geometry,
    config: &InversionConfig,
) -> Result<MpeInversion<T>> {
    config.validate_for(geometry)?;
    let table = build_coefficients::<T>(geometry, config.m, config.k_max, config.mode)?;
    let unknowns = config.k_max as usize + 1;
    let resampled_len = if curve.is_empty() { 0 } else { (curve.len() - 1) * config.spline_factor as usize + 1 };
    if resampled_len < unknowns {
        return Err(Error::Underdetermined { unknowns, points: resampled_len });
    }
    let dense = resample_spline(curve, config.spline_factor, config.spline_space)?;
    let fit = fit_series(&dense, config)?;
    let b: Vec<T> =
        fit.series.coefficients().iter().enumerate().map(|(k, &a)| table.get(k).map_or(T::zero(), |g| a / g)).collect();
    let series = PowerSeries::new(config.m, b, fit.series.reference_intensity())?;
    let values = curve.intensities().iter().map(|&i| series.evaluate(i)).collect::<Result<Vec<T>>>()?;
    let samples = SignalCurve::from_samples(&curve.intensities(), &values, "mpe")?;
    let (negative_samples, negative_excursion, sign_changes, oscillatory) = shape_diagnostics(&values);
    let excluded = table.excluded();
    Ok(MpeInversion {
        probability: ProbabilityCurve { samples, series: Some(series) },
        signal_series: fit.series,
        coefficients: table,
        diagnostics: InversionDiagnostics {
            fit: fit.diagnostics,
            excluded,
            negative_samples,
            negative_excursion,
            sign_changes,
            oscillatory,
        },
    })
}

/// ISS reference inversion for the 2D geometry: `P(I0) = dS/d ln I0`,
/// from the analytic derivative of a natural spline in `ln I0`.
pub fn iss_invert<T: Real>(curve: &SignalCurve<T>) -> Result<ProbabilityCurve<T>> {
    if curve.len() < 3 {
        return Err(Error::Domain(format!("ISS needs at least 3 points, got {}", curve.len())));
    }
    let u: Vec<T> = curve.intensities().iter().map(|i| i.ln()).collect();
    let spline = CubicSpline::natural(u.clone(), curve.values())?;
    let p: Vec<T> = u.iter().map(|&x| spline.derivative(x)).collect();
    Ok(ProbabilityCurve { samples: SignalCurve::from_samples(&curve.intensities(), &p, "iss")?, series: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::average_series;
    use crate::models::{model_probability, model_yield, ModelParams};
    use crate::series::log_grid;
    use crate::Wide;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn model_curve() -> SignalCurve<f64> {
        let p = ModelParams::reference();
        let grid = log_grid(1e13, 6e14, 60);
        let s: Vec<f64> = grid.iter().map(|&i| model_yield(&p, i).unwrap()).collect();
        SignalCurve::from_samples(&grid, &s, "model").unwrap()
    }

    #[test]
    fn chebyshev_table_matches_recurrence() {
        let table = shifted_chebyshev_monomials::<f64>(6);
        for x in [0.0f64, 0.3, 0.77, 1.0] {
            let direct = chebyshev_row(x, 6);
            for j in 0..=6 {
                let mono: f64 = table[j].iter().enumerate().map(|(k, c)| c * x.powi(k as i32)).sum();
                assert_relative_eq!(mono, direct[j], epsilon = 1e-12);
            }
        }
        assert_eq!(table[3], vec![-1.0, 18.0, -48.0, 32.0]);
    }

    #[test]
    fn resample_identity_and_power_law() {
        let c = model_curve();
        assert_eq!(resample_spline(&c, 1, SplineSpace::LogLog).unwrap(), c);
        let grid = log_grid(1e13, 1e14, 12);
        let s: Vec<f64> = grid.iter().map(|&i| (i / 1e14).powi(8)).collect();
        let law = SignalCurve::from_samples(&grid, &s, "law").unwrap();
        let r = resample_spline(&law, 10, SplineSpace::LogLog).unwrap();
        assert_eq!(r.len(), 111);
        for &(i, v) in r.points() {
            assert_relative_eq!(v, (i / 1e14).powi(8), max_relative = 1e-12);
        }
        for (j, p) in law.points().iter().enumerate() {
            assert_eq!(r.points()[10 * j], *p);
        }
    }

    #[test]
    fn resample_model_yield() {
        let r = resample_spline(&model_curve(), 10, SplineSpace::LogLog).unwrap();
        assert_eq!(r.len(), 591);
        let p = ModelParams::reference();
        for &(i, v) in r.points() {
            let exact = model_yield(&p, i).unwrap();
            assert!(((v - exact) / exact).abs() < 1e-4);
        }
    }

    #[test]
    fn resample_rejects_bad_input() {
        let c = SignalCurve::from_samples(&[1.0, 2.0, 3.0, 4.0], &[1.0, 0.0, 1.0, 2.0], "z").unwrap();
        assert!(matches!(resample_spline(&c, 10, SplineSpace::LogLog), Err(Error::Domain(_))));
        assert!(resample_spline(&c, 10, SplineSpace::Linear).is_ok());
        let short = SignalCurve::from_samples(&[1.0, 2.0, 3.0], &[1.0, 1.0, 1.0], "z").unwrap();
        assert!(resample_spline(&short, 10, SplineSpace::LogLog).is_err());
    }

    #[test]
    fn fits_exact_power() {
        let grid = log_grid(1e13, 1e14, 30);
        let s: Vec<f64> = grid.iter().map(|&i| (i / 1e14).powi(5)).collect();
        let c = SignalCurve::from_samples(&grid, &s, "x5").unwrap();
        // x^(m-1+k) = x^5: k = 5 for m = 1, k = 4 for m = 2.
        for (m, hit) in [(1, 5), (2, 4)] {
            let fit = fit_series(&c, &InversionConfig::new(m, 8).with_scheme(WeightScheme::Uniform)).unwrap();
            let a = fit.series.coefficients();
            assert!((a[hit] - 1.0).abs() < 1e-8);
            for (k, v) in a.iter().enumerate() {
                if k != hit {
                    assert!(v.abs() < 1e-8, "A_{k} = {v}");
                }
            }
        }
    }

    #[test]
    fn fit_quality_on_model_yield() {
        let dense = resample_spline(&model_curve().cast::<Wide>(), 10, SplineSpace::LogLog).unwrap();
        let cfg = InversionConfig::new(0, 36).with_mode(CoefficientMode::Continuation);
        let fit = fit_series(&dense, &cfg).unwrap();
        assert!(fit.diagnostics.relative_residual < 1e-3, "{:?}", fit.diagnostics);
        assert!(fit.diagnostics.warnings.is_empty());
    }

    #[test]
    fn underdetermined() {
        let c = SignalCurve::from_samples(&[1.0, 2.0], &[1.0, 2.0], "two").unwrap();
        let cfg = InversionConfig::new(0, 36);
        assert!(matches!(fit_series(&c, &cfg), Err(Error::Underdetermined { .. })));
        assert!(matches!(mpe_invert(&c, Geometry::TwoD, &cfg), Err(Error::Underdetermined { .. })));
    }

    #[test]
    fn restrictions() {
        let c = model_curve();
        for (g, m) in [(Geometry::ThreeD, 2), (Geometry::OneD, 0)] {
            let cfg = InversionConfig::new(m, 10);
            assert!(matches!(mpe_invert(&c, g, &cfg), Err(Error::Restriction(_))));
        }
        let cfg = InversionConfig::new(2, 10).with_mode(CoefficientMode::Continuation);
        assert!(matches!(mpe_invert(&c, Geometry::ThreeD, &cfg), Err(Error::Restriction(_))));
    }

    #[test]
    fn exact_roundtrip_wide() {
        let b: Vec<Wide> = [0.4, -0.3, 0.9, 0.0, 0.25, -0.7].iter().map(|&v| Wide::lit(v)).collect();
        let prob = PowerSeries::new(3, b.clone(), Wide::lit(2e14)).unwrap();
        let sig = average_series(&prob, Geometry::ThreeD).unwrap();
        let grid: Vec<Wide> = log_grid(1e13, 2e14, 25).into_iter().map(Wide::lit).collect();
        let s: Vec<Wide> = grid.iter().map(|&i| sig.evaluate(i).unwrap()).collect();
        let curve = SignalCurve::from_samples(&grid, &s, "poly").unwrap();
        let cfg = InversionConfig::new(3, 5).with_spline_factor(1);
        let inv = mpe_invert(&curve, Geometry::ThreeD, &cfg).unwrap();
        let got = inv.probability.series.unwrap();
        for (g, t) in got.coefficients().iter().zip(&b) {
            assert!((*g - *t).abs().as_f64() < 1e-25);
        }
    }

    #[test]
    fn series_reproduces_samples() {
        let inv = mpe_invert(
            &model_curve().cast::<Wide>(),
            Geometry::TwoD,
            &InversionConfig::new(0, 20).with_mode(CoefficientMode::Continuation),
        )
        .unwrap();
        let series = inv.probability.series.as_ref().unwrap();
        for &(i, p) in inv.probability.points() {
            assert_eq!(series.evaluate(i).unwrap(), p);
        }
        assert_eq!(inv.diagnostics.excluded, vec![1]);
    }

    #[test]
    fn iss_of_log_is_one() {
        let grid = log_grid(1e12, 1e15, 20);
        let s: Vec<f64> = grid.iter().map(|&i| (i / 3e11).ln()).collect();
        let p = iss_invert(&SignalCurve::from_samples(&grid, &s, "ln").unwrap()).unwrap();
        for v in p.probabilities() {
            assert_relative_eq!(v, 1.0, max_relative = 1e-12);
        }
        let short = SignalCurve::from_samples(&[1.0, 2.0], &[0.0, 1.0], "s").unwrap();
        assert!(matches!(iss_invert(&short), Err(Error::Domain(_))));
    }

    #[test]
    fn iss_presaturation() {
        let params = ModelParams::reference();
        let p = iss_invert(&model_curve()).unwrap();
        for &(i, v) in p.points() {
            if i < 0.5 * params.i_s1 && i > 2e13 {
                let exact = model_probability(&params, i).unwrap();
                assert!(((v - exact) / exact).abs() < 0.05, "I={i:e}: {v} vs {exact}");
            }
        }
    }

    #[test]
    fn yield_unit_equivariance() {
        let c = model_curve().cast::<Wide>();
        let scaled =
            SignalCurve::new(c.points().iter().map(|&(i, s)| (i, s * Wide::lit(100.0))).collect(), "scaled").unwrap();
        let cfg = InversionConfig::new(0, 24).with_mode(CoefficientMode::Continuation);
        let a = mpe_invert(&c, Geometry::TwoD, &cfg).unwrap();
        let b = mpe_invert(&scaled, Geometry::TwoD, &cfg).unwrap();
        for (pa, pb) in a.probability.probabilities().iter().zip(b.probability.probabilities()) {
            let d = (*pa * Wide::lit(100.0) - pb).abs().as_f64();
            assert!(d <= 1e-20, "{d:e}");
        }
    }

    fn weighted_sse(curve: &SignalCurve<f64>, fit: &SeriesFit<f64>, above: bool, knee: f64) -> f64 {
        curve
            .points()
            .iter()
            .filter(|(i, _)| (*i > knee) == above)
            .map(|&(i, s)| (s - fit.series.evaluate(i).unwrap()).powi(2))
            .sum()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        // Heavier weights above the knee cannot raise the residual there
        // nor lower it below the knee.
        #[test]
        fn post_saturation_weighting(ratio in 10.0f64..1000.0, i_s1 in 5e13f64..1.2e14) {
            let params = ModelParams { i_s1, ..ModelParams::reference() };
            let grid = log_grid(1e13, 6e14, 60);
            let s: Vec<f64> = grid.iter().map(|&i| model_yield(&params, i).unwrap()).collect();
            let curve = SignalCurve::from_samples(&grid, &s, "m").unwrap();
            let base = InversionConfig::new(1, 6).with_scheme(WeightScheme::Uniform);
            let plain = fit_series(&curve, &base).unwrap();
            let heavy = fit_series(&curve, &base.clone().with_post_saturation(ratio)).unwrap();
            let knee = heavy.diagnostics.knee_intensity.unwrap();
            let post = (weighted_sse(&curve, &plain, true, knee), weighted_sse(&curve, &heavy, true, knee));
            let pre = (weighted_sse(&curve, &plain, false, knee), weighted_sse(&curve, &heavy, false, knee));
            prop_assert!(post.1 <= post.0 * (1.0 + 1e-9));
            prop_assert!(pre.1 >= pre.0 * (1.0 - 1e-9));
        }
    }
}
