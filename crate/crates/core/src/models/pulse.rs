use rayon::prelude::*;

use super::adk::{rate_unchecked, AdkSpecies};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PulseEnvelope {
    #[default]
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseParams {
    /// Intensity FWHM in seconds.
    pub duration_fwhm: f64,
    pub envelope: PulseEnvelope,
}

impl PulseParams {
    pub fn gaussian(duration_fwhm: f64) -> Result<Self> {
        if !(duration_fwhm > 0.0 && duration_fwhm.is_finite()) {
            return Err(Error::Validation(format!("pulse duration must be positive, got {duration_fwhm}")));
        }
        Ok(Self { duration_fwhm, envelope: PulseEnvelope::Gaussian })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseOutcome {
    /// Final population of the singly charged ion.
    pub p1: f64,
    /// Final population of the doubly charged ion.
    pub p2: f64,
    pub max_conservation_error: f64,
    pub steps: usize,
}

const RTOL: f64 = 1e-10;
const ATOL: f64 = 1e-40;
const MAX_STEPS: usize = 2_000_000;
/// Integration window in units of the FWHM.
const SPAN: f64 = 3.0;

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] =
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

/// Final ion populations after a pulse of peak intensity `peak` (W/cm²),
/// from the sequential rate equations `N0 -> N1 -> N2` with ADK rates.
pub fn pulse_probabilities(
    neutral: &AdkSpecies,
    ion: &AdkSpecies,
    pulse: &PulseParams,
    peak: f64,
) -> Result<PulseOutcome> {
    if !(peak > 0.0 && peak.is_finite()) {
        return Err(Error::Domain(format!("peak intensity must be positive, got {peak}")));
    }
    let tau = pulse.duration_fwhm;
    let shape = 4.0 * std::f64::consts::LN_2;
    // Time in units of the FWHM; rates scaled to match.
    let rhs = |s: f64, y: &[f64; 3]| -> [f64; 3] {
        let i = peak * (-shape * s * s).exp();
        let (w1, w2) =
            if i > 0.0 { (rate_unchecked(neutral, i) * tau, rate_unchecked(ion, i) * tau) } else { (0.0, 0.0) };
        [-w1 * y[0], w1 * y[0] - w2 * y[1], w2 * y[1]]
    };

    let mut s = -SPAN;
    let mut y = [1.0, 0.0, 0.0];
    let mut h: f64 = 1e-3;
    let mut k = [[0.0; 3]; 7];
    k[0] = rhs(s, &y);
    let mut steps = 0;
    let mut worst = 0.0f64;
    while s < SPAN {
        if steps >= MAX_STEPS {
            return Err(Error::Accuracy(format!("rate equations needed more than {MAX_STEPS} steps at I = {peak:e}")));
        }
        h = h.min(SPAN - s);
        for stage in 1..7 {
            let mut ys = y;
            for (prev, coeff) in A[stage].iter().enumerate().take(stage) {
                for c in 0..3 {
                    ys[c] += h * coeff * k[prev][c];
                }
            }
            k[stage] = rhs(s + C[stage] * h, &ys);
        }
        let mut next = y;
        let mut err = 0.0f64;
        for c in 0..3 {
            let mut hi = 0.0;
            let mut lo = 0.0;
            for stage in 0..7 {
                hi += B5[stage] * k[stage][c];
                lo += B4[stage] * k[stage][c];
            }
            next[c] = y[c] + h * hi;
            let scale = ATOL + RTOL * y[c].abs().max(next[c].abs());
            err = err.max((h * (hi - lo)).abs() / scale);
        }
        if !err.is_finite() {
            h *= 0.1;
            continue;
        }
        if err <= 1.0 {
            s += h;
            y = next;
            // First-same-as-last: the seventh stage is the next first stage.
            k[0] = k[6];
            steps += 1;
            let drift = (y[0] + y[1] + y[2] - 1.0).abs();
            worst = worst.max(drift);
            if drift > 1e-9 {
                return Err(Error::Accuracy(format!("population drifted by {drift:e} at I = {peak:e}")));
            }
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
        if h < 1e-14 {
            return Err(Error::Accuracy(format!("step size underflow at I = {peak:e}")));
        }
    }
    Ok(PulseOutcome { p1: y[1], p2: y[2], max_conservation_error: worst, steps })
}

/// [`pulse_probabilities`] over many peak intensities, in parallel.
pub fn tabulate_pulse(
    neutral: &AdkSpecies,
    ion: &AdkSpecies,
    pulse: &PulseParams,
    peaks: &[f64],
) -> Result<Vec<PulseOutcome>> {
    peaks.par_iter().map(|&p| pulse_probabilities(neutral, ion, pulse, p)).collect()
}
