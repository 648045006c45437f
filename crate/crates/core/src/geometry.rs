//! Detection-geometry mathematics: isointensity volumes, scale-free
//! kernels `K(xi) = I0 |dV/dI|`, shell radii and the volumetric moments
//! `G_k = int_0^1 K(xi) xi^(m+k-1) dxi`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::quadrature::integrate_to_infinity;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Geometry {
    /// Slit-limited view along one transverse axis.
    OneD,
    /// Slit-limited view along the propagation axis.
    TwoD,
    /// Full view of the focal volume.
    ThreeD,
}

impl Geometry {
    pub const ALL: [Geometry; 3] = [Geometry::OneD, Geometry::TwoD, Geometry::ThreeD];

    /// Smallest exponent offset `m` accepted by strict inversions.
    pub fn min_m(self) -> Option<i32> {
        match self {
            Geometry::OneD => Some(1),
            Geometry::TwoD => None,
            Geometry::ThreeD => Some(3),
        }
    }

    /// Smallest power `p = m + k` for which the moment integral converges.
    pub fn min_power(self) -> i64 {
        match self {
            Geometry::ThreeD => 3,
            _ => 2,
        }
    }
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Geometry::OneD => "1d",
            Geometry::TwoD => "2d",
            Geometry::ThreeD => "3d",
        })
    }
}

impl FromStr for Geometry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "1d" => Ok(Geometry::OneD),
            "2d" => Ok(Geometry::TwoD),
            "3d" => Ok(Geometry::ThreeD),
            _ => Err(Error::Validation(format!("unknown geometry '{s}', expected 1d, 2d or 3d"))),
        }
    }
}

/// How indices outside the convergent range of the moment integral are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum CoefficientMode {
    /// Exclude every index whose integral diverges.
    #[default]
    Strict,
    /// Use the closed forms as analytic continuation where they stay finite
    /// (2D: every `p != 1`). 3D and 1D behave as in strict mode.
    Continuation,
}

impl fmt::Display for CoefficientMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CoefficientMode::Strict => "strict",
            CoefficientMode::Continuation => "continuation",
        })
    }
}

impl FromStr for CoefficientMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "strict" => Ok(CoefficientMode::Strict),
            "continuation" => Ok(CoefficientMode::Continuation),
            _ => Err(Error::Validation(format!("unknown mode '{s}', expected strict or continuation"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamParameters {
    waist: f64,
    rayleigh_range: f64,
}

impl BeamParameters {
    pub fn new(waist: f64, rayleigh_range: f64) -> Result<Self> {
        if !(waist > 0.0 && waist.is_finite() && rayleigh_range > 0.0 && rayleigh_range.is_finite()) {
            return Err(Error::Domain(format!(
                "beam waist and Rayleigh range must be positive, got {waist} and {rayleigh_range}"
            )));
        }
        Ok(Self { waist, rayleigh_range })
    }

    pub fn waist(&self) -> f64 {
        self.waist
    }

    pub fn rayleigh_range(&self) -> f64 {
        self.rayleigh_range
    }

    /// Beam radius `w(z) = w0 sqrt(1 + (z/zR)^2)`.
    pub fn beam_size(&self, z: f64) -> f64 {
        self.waist * (z / self.rayleigh_range).hypot(1.0)
    }
}

fn check_ratio<T: Real>(xi: T) -> Result<()> {
    if xi > T::zero() && xi <= T::one() {
        Ok(())
    } else {
        Err(Error::Domain(format!("intensity ratio must lie in (0, 1], got {xi}")))
    }
}

/// `1/xi - 1`, computed as `(1 - xi)/xi` to keep digits near `xi = 1`.
fn excess<T: Real>(xi: T) -> T {
    (T::one() - xi) / xi
}

/// `ln(1/xi)`.
fn log_ratio<T: Real>(xi: T) -> T {
    if xi > T::lit(0.5) {
        -(xi - T::one()).ln_1p()
    } else {
        -xi.ln()
    }
}

/// Dimensionless volume enclosed by the shell at `xi = I/I0`.
pub fn isointensity_volume<T: Real>(geometry: Geometry, xi: T) -> Result<T> {
    check_ratio(xi)?;
    Ok(match geometry {
        Geometry::ThreeD => {
            let beta = excess(xi).sqrt();
            beta + beta * beta * beta / T::lit(6.0) - beta.atan()
        }
        Geometry::TwoD => log_ratio(xi),
        Geometry::OneD => log_ratio(xi).sqrt(),
    })
}

/// Intensity-scaled volumetric weight `I0 |dV/dI|` at `xi = I/I0`.
///
/// The 1D kernel diverges at `xi = 1`; that point returns [`Error::Singular`].
pub fn kernel<T: Real>(geometry: Geometry, xi: T) -> Result<T> {
    check_ratio(xi)?;
    let inv = xi.recip();
    Ok(match geometry {
        Geometry::ThreeD => inv * (T::lit(2.0) + inv) * excess(xi).sqrt() / T::lit(4.0),
        Geometry::TwoD => inv,
        Geometry::OneD => {
            if xi == T::one() {
                return Err(Error::Singular("1D kernel diverges at xi = 1".into()));
            }
            inv / (T::lit(2.0) * log_ratio(xi).sqrt())
        }
    })
}

fn check_intensities(intensity: f64, peak: f64) -> Result<()> {
    if intensity > 0.0 && peak > 0.0 && intensity.is_finite() && peak.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("intensities must be positive, got I={intensity}, I0={peak}")))
    }
}

/// Volume at dimensional intensities; depends only on `intensity / peak`.
pub fn isointensity_volume_at(geometry: Geometry, intensity: f64, peak: f64) -> Result<f64> {
    check_intensities(intensity, peak)?;
    isointensity_volume(geometry, intensity / peak)
}

/// Kernel at dimensional intensities; depends only on `intensity / peak`.
pub fn kernel_at(geometry: Geometry, intensity: f64, peak: f64) -> Result<f64> {
    check_intensities(intensity, peak)?;
    kernel(geometry, intensity / peak)
}

/// Radius at axial position `z` where the local intensity equals `intensity`
/// for a Gaussian focus of peak `peak`. `None` when no such shell exists.
pub fn shell_radius(z: f64, intensity: f64, peak: f64, beam: &BeamParameters) -> Result<Option<f64>> {
    check_intensities(intensity, peak)?;
    let w = beam.beam_size(z);
    let arg = peak * beam.waist * beam.waist / (intensity * w * w);
    if arg < 1.0 {
        return Ok(None);
    }
    Ok(Some(w * (0.5 * arg.ln()).sqrt()))
}

fn convergent(geometry: Geometry, p: i64, mode: CoefficientMode) -> bool {
    match (geometry, mode) {
        (Geometry::TwoD, CoefficientMode::Continuation) => p != 1,
        _ => p >= geometry.min_power(),
    }
}

fn restriction(geometry: Geometry, p: i64, mode: CoefficientMode) -> Error {
    Error::Restriction(format!(
        "power p = m + k = {p} has no {mode} moment in {geometry} (requires p >= {})",
        geometry.min_power()
    ))
}

/// Closed-form moment `G` for power `p = m + k` in strict mode.
pub fn coefficient_closed<T: Real>(geometry: Geometry, m: i32, k: u32) -> Result<T> {
    coefficient_closed_with(geometry, m, k, CoefficientMode::Strict)
}

/// Closed-form moment with an explicit [`CoefficientMode`].
pub fn coefficient_closed_with<T: Real>(geometry: Geometry, m: i32, k: u32, mode: CoefficientMode) -> Result<T> {
    let p = m as i64 + k as i64;
    if !convergent(geometry, p, mode) {
        return Err(restriction(geometry, p, mode));
    }
    let q = T::from_int(p - 1);
    Ok(match geometry {
        Geometry::TwoD => q.recip(),
        Geometry::OneD => T::PI().sqrt() / (T::lit(2.0) * q.sqrt()),
        Geometry::ThreeD => {
            // (3 pi / 8) c_n / (n + 2) with c_n = (2n)! / (4^n (n!)^2).
            let n = p - 3;
            let mut c = T::one();
            for i in 1..=n {
                c *= T::from_int(2 * i - 1) / T::from_int(2 * i);
            }
            T::lit(3.0) * T::PI() / T::lit(8.0) * c / T::from_int(n + 2)
        }
    })
}

/// The factorial form `(p-2)^2 (2(p-3))! / (4^p ((p-2)!)^2 (p-1))`,
/// evaluated through log-gamma. Differs from [`coefficient_closed`] for 3D
/// by a constant factor only, so it serves as a check on ratios `G_k/G_0`.
pub fn factorial_form_3d(p: i64) -> Result<f64> {
    if p < 3 {
        return Err(restriction(Geometry::ThreeD, p, CoefficientMode::Strict));
    }
    let pf = p as f64;
    let ln = 2.0 * (pf - 2.0).ln() + libm::lgamma(2.0 * (pf - 3.0) + 1.0)
        - pf * 4f64.ln()
        - 2.0 * libm::lgamma(pf - 1.0)
        - (pf - 1.0).ln();
    Ok(ln.exp())
}

/// Moment by adaptive quadrature, independent of the closed forms.
///
/// Substitutes `xi = exp(-u)` (and `u = t^2` in 1D and 3D) so that both
/// endpoint singularities disappear from the integrand.
pub fn coefficient_oracle(geometry: Geometry, m: i32, k: u32, rel_tol: f64) -> Result<f64> {
    let p = m as i64 + k as i64;
    if !convergent(geometry, p, CoefficientMode::Strict) {
        return Err(restriction(geometry, p, CoefficientMode::Strict));
    }
    let q = (p - 1) as f64;
    let r = integrate_in_log_ratio(geometry, |u| (-u * q).exp(), rel_tol);
    if !r.converged {
        return Err(Error::Accuracy(format!(
            "moment for {geometry}, p = {p} reached {:.3e} +/- {:.1e}",
            r.value, r.abs_error
        )));
    }
    Ok(r.value)
}

/// Integrates `int_0^1 K(xi) f(xi) dxi` with `f` given as a function of
/// `u = -ln xi`. Values of `f` below 1e-300 are treated as zero.
pub(crate) fn integrate_in_log_ratio<F: Fn(f64) -> f64>(
    geometry: Geometry,
    f: F,
    rel_tol: f64,
) -> crate::quadrature::Integral {
    const U_MAX: f64 = 745.0;
    let guarded = |u: f64| {
        let v = f(u);
        if v.abs() < 1e-300 {
            0.0
        } else {
            v
        }
    };
    match geometry {
        Geometry::TwoD => integrate_to_infinity(guarded, 0.0, U_MAX, rel_tol),
        Geometry::OneD => integrate_to_infinity(|t: f64| guarded(t * t), 0.0, U_MAX.sqrt(), rel_tol),
        Geometry::ThreeD => integrate_to_infinity(
            |t: f64| {
                let u = t * t;
                let v = guarded(u);
                if v == 0.0 {
                    return 0.0;
                }
                0.5 * t * (2.0 + u.exp()) * u.exp_m1().sqrt() * v
            },
            0.0,
            U_MAX.sqrt(),
            rel_tol,
        ),
    }
}

/// Table of moments `G_k`, `k = 0..=k_max`, for one `(geometry, m)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct VolumetricCoefficients<T> {
    geometry: Geometry,
    m: i32,
    mode: CoefficientMode,
    values: Vec<Option<T>>,
}

impl<T: Real> VolumetricCoefficients<T> {
    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn m(&self) -> i32 {
        self.m
    }

    pub fn mode(&self) -> CoefficientMode {
        self.mode
    }

    pub fn k_max(&self) -> usize {
        self.values.len() - 1
    }

    /// `G_k`, or `None` when `k` is excluded or out of range.
    pub fn get(&self, k: usize) -> Option<T> {
        self.values.get(k).copied().flatten()
    }

    pub fn values(&self) -> &[Option<T>] {
        &self.values
    }

    pub fn excluded(&self) -> Vec<usize> {
        self.values.iter().enumerate().filter_map(|(k, v)| v.is_none().then_some(k)).collect()
    }
}

pub fn build_coefficients<T: Real>(
    geometry: Geometry,
    m: i32,
    k_max: u32,
    mode: CoefficientMode,
) -> Result<VolumetricCoefficients<T>> {
    let values: Vec<Option<T>> = (0..=k_max).map(|k| coefficient_closed_with(geometry, m, k, mode).ok()).collect();
    if values.iter().all(Option::is_none) {
        return Err(Error::Restriction(format!(
            "no admissible index for {geometry} with m = {m}, k_max = {k_max} ({mode} mode)"
        )));
    }
    Ok(VolumetricCoefficients { geometry, m, mode, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use num_bigfloat::BigFloat;
    use num_traits::FloatConst;
    use proptest::prelude::*;
    use std::f64::consts::{E, PI};

    #[test]
    fn volumes() {
        for g in Geometry::ALL {
            assert_eq!(isointensity_volume(g, 1.0).unwrap(), 0.0);
        }
        assert_relative_eq!(isointensity_volume(Geometry::TwoD, 0.5).unwrap(), 2f64.ln());
        assert_relative_eq!(
            isointensity_volume(Geometry::ThreeD, 0.5).unwrap(),
            1.0 + 1.0 / 6.0 - PI / 4.0,
            max_relative = 1e-15
        );
        assert!(matches!(isointensity_volume(Geometry::TwoD, 0.0), Err(Error::Domain(_))));
        assert!(matches!(isointensity_volume(Geometry::OneD, 1.5), Err(Error::Domain(_))));
    }

    #[test]
    fn three_d_volume_matches_gaussian_focus() {
        // Volume with local intensity above xi*I0, integrated slice by slice
        // from the shell radius. Should be proportional to the closed form.
        let beam = BeamParameters::new(1.0, 1.0).unwrap();
        let slab = |xi: f64| {
            let zmax = (1.0 / xi - 1.0).sqrt();
            let r = crate::quadrature::integrate(
                |z| {
                    let rad = shell_radius(z, xi, 1.0, &beam).unwrap().unwrap_or(0.0);
                    2.0 * PI * rad * rad
                },
                0.0,
                zmax,
                0.0,
                1e-12,
                500,
            );
            r.value
        };
        let ratios: Vec<f64> = [0.05, 0.3, 0.5, 0.9]
            .iter()
            .map(|&xi| slab(xi) / isointensity_volume(Geometry::ThreeD, xi).unwrap())
            .collect();
        for r in &ratios {
            assert_relative_eq!(*r, ratios[0], max_relative = 1e-9);
        }
    }

    #[test]
    fn kernels() {
        assert_eq!(kernel(Geometry::ThreeD, 1.0).unwrap(), 0.0);
        assert_eq!(kernel(Geometry::TwoD, 1.0).unwrap(), 1.0);
        assert_eq!(kernel(Geometry::TwoD, 0.25).unwrap(), 4.0);
        assert_relative_eq!(kernel(Geometry::OneD, (-1f64).exp()).unwrap(), E / 2.0, max_relative = 1e-15);
        assert_relative_eq!(kernel(Geometry::ThreeD, 0.5).unwrap(), 2.0, max_relative = 1e-15);
        assert!(matches!(kernel(Geometry::OneD, 1.0), Err(Error::Singular(_))));
        assert!(matches!(kernel(Geometry::OneD, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn kernel_is_scaled_volume_derivative() {
        let h = 1e-7;
        for g in Geometry::ALL {
            for xi in [0.05, 0.2, 0.5, 0.8, 0.95] {
                let dv =
                    (isointensity_volume(g, xi - h).unwrap() - isointensity_volume(g, xi + h).unwrap()) / (2.0 * h);
                assert_relative_eq!(kernel(g, xi).unwrap(), dv, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn radii() {
        let beam = BeamParameters::new(10e-6, 1e-3).unwrap();
        assert_eq!(shell_radius(0.0, 1e14, 1e14, &beam).unwrap(), Some(0.0));
        let r = shell_radius(0.0, 1e14 / E / E, 1e14, &beam).unwrap().unwrap();
        assert_relative_eq!(r, 10e-6, max_relative = 1e-14);
        assert_eq!(shell_radius(1e-3, 1e14, 1e14, &beam).unwrap(), None);
        assert!(shell_radius(0.0, -1.0, 1e14, &beam).is_err());
        assert!(BeamParameters::new(0.0, 1.0).is_err());
    }

    #[test]
    fn closed_forms() {
        assert_eq!(coefficient_closed::<f64>(Geometry::TwoD, 1, 8).unwrap(), 0.125);
        assert_relative_eq!(
            coefficient_closed::<f64>(Geometry::ThreeD, 3, 0).unwrap(),
            3.0 * PI / 16.0,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            coefficient_closed::<f64>(Geometry::OneD, 2, 0).unwrap(),
            PI.sqrt() / 2.0,
            max_relative = 1e-15
        );
        assert!(matches!(coefficient_closed::<f64>(Geometry::ThreeD, 2, 0), Err(Error::Restriction(_))));
        assert_eq!(
            coefficient_closed_with::<f64>(Geometry::TwoD, -8, 0, CoefficientMode::Continuation).unwrap(),
            -1.0 / 9.0
        );
        assert!(coefficient_closed_with::<f64>(Geometry::TwoD, 0, 1, CoefficientMode::Continuation).is_err());
        let wide: BigFloat = coefficient_closed(Geometry::ThreeD, 3, 0).unwrap();
        let err = wide - BigFloat::lit(3.0) * BigFloat::PI() / BigFloat::lit(16.0);
        assert!(err.abs().as_f64() < 1e-38);
    }

    #[test]
    fn oracle_examples() {
        assert_relative_eq!(coefficient_oracle(Geometry::TwoD, 3, 0, 1e-10).unwrap(), 0.5, max_relative = 1e-10);
        assert_relative_eq!(
            coefficient_oracle(Geometry::ThreeD, 3, 0, 1e-10).unwrap(),
            3.0 * PI / 16.0,
            max_relative = 1e-10
        );
        assert_relative_eq!(
            coefficient_oracle(Geometry::OneD, 2, 3, 1e-10).unwrap(),
            0.5 * (PI / 4.0).sqrt(),
            max_relative = 1e-10
        );
        assert!(matches!(coefficient_oracle(Geometry::OneD, 0, 1, 1e-10), Err(Error::Restriction(_))));
    }

    #[test]
    fn oracle_with_kernel_function() {
        // Plain xi-space integration of the kernel function itself.
        for g in Geometry::ALL {
            let p = 5;
            let direct = crate::quadrature::integrate(
                |xi: f64| if xi <= 0.0 || xi >= 1.0 { 0.0 } else { kernel(g, xi).unwrap() * xi.powi(p - 1) },
                0.0,
                1.0,
                0.0,
                1e-11,
                2000,
            );
            let closed: f64 = coefficient_closed(g, p, 0).unwrap();
            // The untransformed 1D integrand keeps its endpoint singularity.
            assert_relative_eq!(direct.value, closed, max_relative = 1e-6);
        }
    }

    #[test]
    fn table_with_exclusions() {
        let t = build_coefficients::<f64>(Geometry::TwoD, 0, 3, CoefficientMode::Strict).unwrap();
        assert_eq!(t.excluded(), vec![0, 1]);
        assert_eq!(t.get(2), Some(1.0));
        assert_eq!(t.get(3), Some(0.5));
        let t3 = build_coefficients::<f64>(Geometry::ThreeD, 3, 0, CoefficientMode::Strict).unwrap();
        assert_relative_eq!(t3.get(0).unwrap(), 3.0 * PI / 16.0);
        assert!(build_coefficients::<f64>(Geometry::ThreeD, 2, 0, CoefficientMode::Strict).is_err());
        let big = build_coefficients::<f64>(Geometry::ThreeD, 3, 60, CoefficientMode::Strict).unwrap();
        assert!(big.values().iter().all(|v| v.unwrap().is_finite() && v.unwrap() > 0.0));
    }

    #[test]
    fn parse_tags() {
        assert_eq!("3D".parse::<Geometry>().unwrap(), Geometry::ThreeD);
        assert!("4d".parse::<Geometry>().is_err());
        assert_eq!("continuation".parse::<CoefficientMode>().unwrap(), CoefficientMode::Continuation);
    }

    proptest! {
        #[test]
        fn scale_free(xi in 1e-6f64..0.999, c in 1e-3f64..1e3) {
            let i0 = 3.0e14;
            for g in Geometry::ALL {
                let a = kernel_at(g, xi * i0, i0).unwrap();
                let b = kernel_at(g, xi * i0 * c, i0 * c).unwrap();
                prop_assert!((a - b).abs() <= 1e-12 * a.abs());
            }
        }

        #[test]
        fn moments_positive_and_decreasing(m in -5i32..10, k in 0u32..40) {
            for g in Geometry::ALL {
                if let (Ok(a), Ok(b)) = (
                    coefficient_closed::<f64>(g, m, k),
                    coefficient_closed::<f64>(g, m, k + 1),
                ) {
                    prop_assert!(a > 0.0 && b > 0.0 && b < a);
                }
            }
        }

        #[test]
        fn two_d_power_closure(alpha in 2i32..40) {
            let g: f64 = coefficient_closed(Geometry::TwoD, 1, alpha as u32).unwrap();
            prop_assert_eq!(g, 1.0 / alpha as f64);
        }
    }
}
