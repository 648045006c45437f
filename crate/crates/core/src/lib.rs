//! Multiphoton-expansion inversion of spatially averaged ion yields.
//!
//! A probability `P(I) = x^(m-1) sum B_k x^k` (with `x = I/I_ref`) averages
//! over a Gaussian focus to `S(I0) = x0^(m-1) sum G_k B_k x0^k`, so fitting
//! the measured yield to a power series and dividing each coefficient by
//! the geometry moment `G_k` recovers `P`.
//!
//! The numerical core is generic over [`Real`]; [`Wide`] is the
//! high-precision scalar needed for degree-36 expansions.

pub mod error;
pub mod forward;
pub mod geometry;
pub mod inversion;
pub mod io;
pub mod linalg;
pub mod models;
pub mod quadrature;
pub mod scalar;
pub mod series;
pub mod spline;

pub use error::{Error, Result};
pub use forward::{average_quadrature, average_series, average_series_with, AveragedCurve};
pub use geometry::{
    build_coefficients, coefficient_closed, coefficient_closed_with, coefficient_oracle, isointensity_volume, kernel,
    shell_radius, BeamParameters, CoefficientMode, Geometry, VolumetricCoefficients,
};
pub use inversion::{
    fit_series, iss_invert, mpe_invert, resample_spline, FitDiagnostics, InversionConfig, InversionDiagnostics,
    MpeInversion, SeriesFit, SplineSpace, WeightScheme, Weighting,
};
pub use scalar::Real;
pub use series::{log_grid, PowerSeries, ProbabilityCurve, SignalCurve};

/// About 40 significant decimal digits.
pub type Wide = num_bigfloat::BigFloat;

pub type SignalCurve64 = SignalCurve<f64>;
pub type SignalCurveWide = SignalCurve<Wide>;
pub type PowerSeries64 = PowerSeries<f64>;
pub type PowerSeriesWide = PowerSeries<Wide>;
pub type ProbabilityCurve64 = ProbabilityCurve<f64>;
pub type ProbabilityCurveWide = ProbabilityCurve<Wide>;
