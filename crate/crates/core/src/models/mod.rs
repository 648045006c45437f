//! Test problems: a two-step saturation model with closed-form averaged
//! yield, and ADK-based sequential ionization of xenon.

mod adk;
pub mod constants;
mod pulse;
mod table;

pub use adk::{adk_rate, AdkSpecies};
pub use pulse::{pulse_probabilities, tabulate_pulse, PulseEnvelope, PulseOutcome, PulseParams};
pub use table::LogLogTable;

use crate::error::{Error, Result};

/// Orders and saturation intensities of the two-step model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub n1: u32,
    pub n2: u32,
    /// W/cm².
    pub i_s1: f64,
    /// W/cm².
    pub i_s2: f64,
}

impl ModelParams {
    /// `n1 = 8`, `n2 = 14`, `I_S1 = 8e13`, `I_S2 = 2e14` W/cm².
    pub fn reference() -> Self {
        Self { n1: 8, n2: 14, i_s1: 8e13, i_s2: 2e14 }
    }

    pub fn new(n1: u32, n2: u32, i_s1: f64, i_s2: f64) -> Result<Self> {
        let p = Self { n1, n2, i_s1, i_s2 };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        if self.n1 == 0 || self.n2 == 0 {
            return Err(Error::Validation("model orders must be at least 1".into()));
        }
        if !(self.i_s1 > 0.0 && self.i_s2 >= self.i_s1 && self.i_s2.is_finite()) {
            return Err(Error::Validation(format!("need 0 < I_S1 <= I_S2, got {:e} and {:e}", self.i_s1, self.i_s2)));
        }
        Ok(())
    }
}

fn check_intensity(i: f64) -> Result<()> {
    if i > 0.0 && i.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("intensity must be positive, got {i}")))
    }
}

fn logistic(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

/// `r1^n1/(1 + r1^n1) - r2^n2/(1 + r2^n2)` with `r_i = I/I_Si`.
pub fn model_probability(params: &ModelParams, intensity: f64) -> Result<f64> {
    params.validate()?;
    check_intensity(intensity)?;
    let t1 = params.n1 as f64 * (intensity / params.i_s1).ln();
    let t2 = params.n2 as f64 * (intensity / params.i_s2).ln();
    // Above saturation both terms approach 1; subtract their complements.
    Ok(if t1 + t2 > 0.0 { logistic(-t2) - logistic(-t1) } else { logistic(t1) - logistic(t2) })
}

/// Closed-form 2D average of [`model_probability`]:
/// `ln(1 + r1^n1)/n1 - ln(1 + r2^n2)/n2` at `r_i = I0/I_Si`.
pub fn model_yield(params: &ModelParams, peak: f64) -> Result<f64> {
    params.validate()?;
    check_intensity(peak)?;
    let (n1, n2) = (params.n1 as f64, params.n2 as f64);
    let t1 = n1 * (peak / params.i_s1).ln();
    let t2 = n2 * (peak / params.i_s2).ln();
    Ok(if t1 > 0.0 && t2 > 0.0 {
        (params.i_s2 / params.i_s1).ln() + (-t1).exp().ln_1p() / n1 - (-t2).exp().ln_1p() / n2
    } else {
        softplus(t1) / n1 - softplus(t2) / n2
    })
}

/// Partial sum `sum_{k=1}^{k_max} (-1)^(k+1) (r1^(k n1) - r2^(k n2))`.
/// Converges only for `I < I_S1`.
pub fn model_mpe_series(params: &ModelParams, k_max: u32, intensity: f64) -> Result<f64> {
    params.validate()?;
    if !(intensity >= 0.0 && intensity.is_finite()) {
        return Err(Error::Domain(format!("intensity must be nonnegative, got {intensity}")));
    }
    let a = (intensity / params.i_s1).powi(params.n1 as i32);
    let b = (intensity / params.i_s2).powi(params.n2 as i32);
    let mut sum = 0.0;
    let (mut pa, mut pb) = (1.0, 1.0);
    for k in 1..=k_max {
        pa *= a;
        pb *= b;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        sum += sign * (pa - pb);
    }
    Ok(sum)
}
