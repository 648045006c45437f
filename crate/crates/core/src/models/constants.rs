//! Physical constants and atomic data.

/// Hartree energy in eV (CODATA 2018).
pub const HARTREE_EV: f64 = 27.211_386_245_988;

/// Atomic unit of time in s (CODATA 2018).
pub const AU_TIME_S: f64 = 2.418_884_326_585_7e-17;

/// Cycle-averaged intensity of linearly polarized light whose peak field is
/// one atomic unit, in W/cm².
pub const AU_INTENSITY_WCM2: f64 = 3.509_447_58e16;

/// First ionization energy of Xe in eV (NIST Atomic Spectra Database).
pub const XE_IP1_EV: f64 = 12.129_843_6;

/// Second ionization energy of Xe (Xe+ -> Xe2+) in eV (NIST Atomic Spectra Database).
pub const XE_IP2_EV: f64 = 20.975;
