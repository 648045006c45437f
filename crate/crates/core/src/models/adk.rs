use libm::tgamma;

use super::constants::{AU_INTENSITY_WCM2, AU_TIME_S, HARTREE_EV, XE_IP1_EV, XE_IP2_EV};
use crate::error::{Error, Result};

/// Atom or ion ionized by tunneling; `charge_after` is the residual charge
/// `Z` seen by the outgoing electron.
#[derive(Debug, Clone, PartialEq)]
pub struct AdkSpecies {
    pub name: String,
    pub ionization_potential_ev: f64,
    pub charge_after: u32,
    pub l: u32,
    pub m: u32,
}

impl AdkSpecies {
    pub fn new(
        name: impl Into<String>,
        ionization_potential_ev: f64,
        charge_after: u32,
        l: u32,
        m: u32,
    ) -> Result<Self> {
        if !(ionization_potential_ev > 0.0 && ionization_potential_ev.is_finite()) {
            return Err(Error::Validation(format!(
                "ionization potential must be positive, got {ionization_potential_ev}"
            )));
        }
        if charge_after == 0 || m > l {
            return Err(Error::Validation(format!("invalid species: Z = {charge_after}, l = {l}, m = {m}")));
        }
        Ok(Self { name: name.into(), ionization_potential_ev, charge_after, l, m })
    }

    /// Neutral xenon, 5p electron.
    pub fn xenon() -> Self {
        Self::new("Xe", XE_IP1_EV, 1, 1, 0).expect("valid constants")
    }

    /// Singly charged xenon, 5p electron.
    pub fn xenon_ion() -> Self {
        Self::new("Xe+", XE_IP2_EV, 2, 1, 0).expect("valid constants")
    }

    pub fn ip_au(&self) -> f64 {
        self.ionization_potential_ev / HARTREE_EV
    }

    pub fn n_star(&self) -> f64 {
        self.charge_after as f64 / (2.0 * self.ip_au()).sqrt()
    }

    pub fn l_star(&self) -> f64 {
        self.n_star() - 1.0
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(|v| v as f64).product()
}

/// Cycle-averaged ADK rate (1/s) for linear polarization at intensity `I` (W/cm²).
pub fn adk_rate(species: &AdkSpecies, intensity: f64) -> Result<f64> {
    if !(intensity > 0.0 && intensity.is_finite()) {
        return Err(Error::Domain(format!("intensity must be positive, got {intensity}")));
    }
    Ok(rate_unchecked(species, intensity))
}

pub(crate) fn rate_unchecked(species: &AdkSpecies, intensity: f64) -> f64 {
    let ip = species.ip_au();
    let ns = species.n_star();
    let ls = species.l_star();
    let (l, m) = (species.l, species.m);
    let field = (intensity / AU_INTENSITY_WCM2).sqrt();
    let f0 = (2.0 * ip).powf(1.5);
    let c2 = 2f64.powf(2.0 * ns) / (ns * tgamma(ns + ls + 1.0) * tgamma(ns - ls));
    let flm = (2 * l + 1) as f64 * factorial(l + m) / (2f64.powi(m as i32) * factorial(m) * factorial(l - m));
    let ratio = 2.0 * f0 / field;
    let log_w = (2.0 * ns - m as f64 - 1.0) * ratio.ln() - 2.0 * f0 / (3.0 * field);
    let w = c2 * flm * ip * log_w.exp() * (3.0 * field / (std::f64::consts::PI * f0)).sqrt();
    w / AU_TIME_S
}
