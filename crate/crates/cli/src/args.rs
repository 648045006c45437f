use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mpe::{CoefficientMode, Geometry, InversionConfig, SplineSpace, WeightScheme};

/// Multiphoton-expansion inversion of focal-volume averaged ion yields.
#[derive(Debug, Parser)]
#[command(name = "mpe", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate the volumetric coefficients G_k.
    Coeffs {
        #[command(flatten)]
        expansion: Expansion,
        #[command(flatten)]
        output: Output,
    },
    /// Average a probability curve over the focal volume.
    Forward(ForwardArgs),
    /// Recover P(I) from a signal curve by the multiphoton expansion.
    Invert(InvertArgs),
    /// Recover P(I) by differentiating the signal in ln I (2D only).
    Iss {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Model problem: probability, averaged yield, MPE and ISS recoveries.
    DemoModel(DemoModelArgs),
    /// Xenon ADK rate-equation curves, 3D-averaged and inverted.
    DemoAdk(DemoAdkArgs),
}

#[derive(Debug, Args)]
pub struct Expansion {
    #[arg(long)]
    pub geometry: Geometry,
    #[arg(long, allow_negative_numbers = true)]
    pub m: i32,
    #[arg(long, default_value_t = 36)]
    pub kmax: u32,
    #[arg(long, value_enum, default_value_t = Mode::Strict)]
    pub mode: Mode,
}

#[derive(Debug, Args)]
pub struct Fit {
    #[arg(long, default_value_t = 10)]
    pub spline_factor: u32,
    #[arg(long, default_value = "loglog")]
    pub spline_space: SplineSpace,
    #[arg(long, value_enum, default_value_t = Weight::Slope)]
    pub weight: Weight,
    /// Lower bound of slope weights relative to the largest slope.
    #[arg(long, default_value_t = 1e-4)]
    pub slope_floor: f64,
    /// Weight of post-saturation samples relative to the rest.
    #[arg(long)]
    pub weight_post: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub ridge: f64,
}

#[derive(Debug, Args)]
pub struct Grid {
    /// Lowest peak intensity (W/cm^2).
    #[arg(long)]
    pub lo: Option<f64>,
    /// Highest peak intensity (W/cm^2).
    #[arg(long)]
    pub hi: Option<f64>,
    /// Number of log-spaced points.
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write an SVG chart next to each CSV.
    #[arg(long)]
    pub svg: bool,
}

#[derive(Debug, Args)]
pub struct ForwardArgs {
    #[arg(long)]
    pub geometry: Geometry,
    /// Probability CSV, interpolated log-log between rows.
    #[arg(long, conflicts_with = "model", required_unless_present = "model")]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub model: Option<NamedModel>,
    #[command(flatten)]
    pub grid: Grid,
    #[arg(long, default_value_t = 1e-10)]
    pub rel_tol: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct InvertArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub expansion: Expansion,
    #[command(flatten)]
    pub fit: Fit,
    /// Where to write the A_k, G_k, B_k table.
    #[arg(long)]
    pub coeffs_out: Option<PathBuf>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct DemoModelArgs {
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    pub m: i32,
    #[arg(long, default_value_t = 36)]
    pub kmax: u32,
    #[arg(long, value_enum, default_value_t = Mode::Continuation)]
    pub mode: Mode,
    #[command(flatten)]
    pub fit: Fit,
    #[command(flatten)]
    pub grid: Grid,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub svg: bool,
}

#[derive(Debug, Args)]
pub struct DemoAdkArgs {
    #[arg(long, default_value_t = 3, allow_negative_numbers = true)]
    pub m: i32,
    #[arg(long, default_value_t = 36)]
    pub kmax: u32,
    #[command(flatten)]
    pub fit: Fit,
    #[command(flatten)]
    pub grid: Grid,
    /// Intensity FWHM of the pulse in femtoseconds.
    #[arg(long, default_value_t = 100.0)]
    pub fwhm_fs: f64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub svg: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Strict,
    Continuation,
}

impl From<Mode> for CoefficientMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Strict => CoefficientMode::Strict,
            Mode::Continuation => CoefficientMode::Continuation,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Weight {
    Uniform,
    Relative,
    Slope,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NamedModel {
    /// Two-step saturation model with the reference parameters.
    Model,
    /// Xe+ final population from the ADK rate equations.
    AdkXe1,
    /// Xe2+ final population from the ADK rate equations.
    AdkXe2,
}

impl Fit {
    pub fn config(&self, m: i32, kmax: u32, mode: Mode) -> InversionConfig {
        let scheme = match self.weight {
            Weight::Uniform => WeightScheme::Uniform,
            Weight::Relative => WeightScheme::Relative,
            Weight::Slope => WeightScheme::Slope { floor: self.slope_floor },
        };
        let mut cfg = InversionConfig::new(m, kmax)
            .with_mode(mode.into())
            .with_spline_factor(self.spline_factor)
            .with_scheme(scheme)
            .with_ridge(self.ridge);
        cfg.spline_space = self.spline_space;
        if let Some(r) = self.weight_post {
            cfg = cfg.with_post_saturation(r);
        }
        cfg
    }
}

impl Grid {
    pub fn or(&self, lo: f64, hi: f64, points: usize) -> (f64, f64, usize) {
        (self.lo.unwrap_or(lo), self.hi.unwrap_or(hi), self.points.unwrap_or(points))
    }
}
