//! Bogoliubov theory of the homogeneous binary mixture.

use crate::setup::Couplings;
use crate::units::UnitSystem;

/// Elementary excitation branch of a symmetric mixture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    /// In-phase (n₁ + n₂) branch, effective coupling g + g₁₂.
    Density,
    /// Out-of-phase (n₁ − n₂) branch, effective coupling g − g₁₂.
    Spin,
}

impl Channel {
    pub fn name(self) -> &'static str {
        match self {
            Channel::Density => "density",
            Channel::Spin => "spin",
        }
    }
}

/// Uniform background. `n_bar` is the effective total density n̄ entering
/// n̄(g ± g₁₂); couplings in matching units (n̄·g in rad/ms).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Background {
    pub n_bar: f64,
    pub g: f64,
    pub g12: f64,
    pub units: UnitSystem,
}

impl Background {
    pub fn new(n_bar: f64, couplings: &Couplings, units: UnitSystem) -> Self {
        Background {
            n_bar,
            g: 0.5 * (couplings.g11 + couplings.g22),
            g12: couplings.g12,
            units,
        }
    }

    /// n̄(g ± g₁₂) in rad/ms.
    pub fn interaction(&self, channel: Channel) -> f64 {
        match channel {
            Channel::Density => self.n_bar * (self.g + self.g12),
            Channel::Spin => self.n_bar * (self.g - self.g12),
        }
    }
}

/// ω(k) = √(ε_k(ε_k + n̄(g ± g₁₂))) in rad/ms, ε_k = (ħ/m)k²/2.
pub fn bogoliubov_omega(k: f64, bg: &Background, channel: Channel) -> f64 {
    let e = bg.units.free_dispersion(k);
    (e * (e + bg.interaction(channel))).max(0.0).sqrt()
}

/// Sound speed (μm/ms) and healing length (μm) of a branch.
pub fn sound_and_healing(bg: &Background, channel: Channel) -> (f64, f64) {
    let lam = bg.interaction(channel);
    let hm = bg.units.hbar_over_m;
    ((0.5 * lam * hm).sqrt(), (hm / (2.0 * lam)).sqrt())
}

/// Wavenumber of the parametrically resonant pair, ω(k) = ω_m/2.
pub fn resonance_k(omega_m: f64, bg: &Background, channel: Channel) -> f64 {
    let lam = bg.interaction(channel);
    let eps = omega_m * omega_m / (2.0 * (lam + (lam * lam + omega_m * omega_m).sqrt()));
    (2.0 * eps / bg.units.hbar_over_m).sqrt()
}

/// Wavenumber where one quantum from each branch adds up to `omega`:
/// ω_spin(k) + ω_density(k) = ω. Found by bisection (the sum is monotone).
pub fn sum_resonance_k(omega: f64, bg: &Background) -> f64 {
    let f = |k: f64| bogoliubov_omega(k, bg, Channel::Spin) + bogoliubov_omega(k, bg, Channel::Density) - omega;
    let (mut lo, mut hi) = (0.0, 1.0);
    while f(hi) < 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// n̄ used in predictions: half the central total density for 3D runs (the
/// transverse Thomas–Fermi average), the central reduced density otherwise
/// (the transverse profile is already folded into the coupling).
pub fn background_density(central_total: f64, dims: usize) -> f64 {
    if dims == 3 {
        0.5 * central_total
    } else {
        central_total
    }
}
