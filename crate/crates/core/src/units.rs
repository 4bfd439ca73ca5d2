//! Unit system and the scattering-length to coupling conversion.
//!
//! Lengths are in μm, times in ms and frequencies in rad/ms. Energies are
//! carried divided by ħ, so an energy is also a frequency in rad/ms, a
//! potential `V/ħ` is in rad/ms and a coupling `g/ħ` is in μm³/ms (or its
//! reduced-dimension analogue μm^d/ms). SI quantities only appear in the
//! constants below and at configuration boundaries.

use serde::{Deserialize, Serialize};

/// Reduced Planck constant, J·s (CODATA 2018).
pub const HBAR_SI: f64 = 1.054_571_817e-34;
/// Atomic mass constant, kg (CODATA 2018).
pub const ATOMIC_MASS_SI: f64 = 1.660_539_066_60e-27;
/// Bohr radius in μm.
pub const BOHR_RADIUS_UM: f64 = 5.291_772_109_03e-5;
/// Mass of ²³Na in atomic mass units.
pub const SODIUM_23_MASS_U: f64 = 22.989_769_28;

/// Default intra-component scattering length of the Na |F=1, m_F=±1⟩ pair,
/// in Bohr radii.
pub const DEFAULT_SCATTERING_BOHR: f64 = 54.54;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitSystem {
    /// ħ/m in μm²/ms.
    pub hbar_over_m: f64,
}

impl Default for UnitSystem {
    fn default() -> Self {
        UnitSystem { hbar_over_m: 2.7625 }
    }
}

impl UnitSystem {
    /// ħ/m evaluated from CODATA constants for a species of the given mass.
    pub fn from_mass_u(mass_u: f64) -> Self {
        let si = HBAR_SI / (mass_u * ATOMIC_MASS_SI); // m²/s
        UnitSystem {
            hbar_over_m: si * 1e9,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.hbar_over_m.is_finite() && self.hbar_over_m > 0.0
    }

    /// Free-particle dispersion ħk²/2m in rad/ms.
    #[inline]
    pub fn free_dispersion(&self, k: f64) -> f64 {
        0.5 * self.hbar_over_m * k * k
    }

    /// Harmonic-oscillator length √(ħ/mω) in μm.
    pub fn oscillator_length(&self, omega: f64) -> f64 {
        (self.hbar_over_m / omega).sqrt()
    }

    /// Coefficient c such that V/ħ = c·x² for a harmonic trap of angular
    /// frequency `omega`.
    #[inline]
    pub fn trap_coefficient(&self, omega: f64) -> f64 {
        omega * omega / (2.0 * self.hbar_over_m)
    }
}

/// Convert a scattering length in μm into a contact coupling `g/ħ` in μm³/ms.
///
/// Negative lengths are accepted and give attractive couplings.
pub fn coupling_from_scattering(a: f64, units: &UnitSystem) -> f64 {
    4.0 * std::f64::consts::PI * units.hbar_over_m * a
}

/// Converts Hz to rad/ms.
#[inline]
pub fn hz_to_rad_per_ms(f_hz: f64) -> f64 {
    2.0 * std::f64::consts::PI * f_hz * 1e-3
}

#[inline]
pub fn rad_per_ms_to_hz(omega: f64) -> f64 {
    omega * 1e3 / (2.0 * std::f64::consts::PI)
}
