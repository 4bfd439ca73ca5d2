//! Physical parameters of the trapped mixture.

use serde::{Deserialize, Serialize};

use crate::error::{GpfError, Result};
use crate::units::{
    coupling_from_scattering, hz_to_rad_per_ms, UnitSystem, BOHR_RADIUS_UM,
    DEFAULT_SCATTERING_BOHR,
};

/// Contact couplings `g_ij/ħ` in μm^d/ms for the simulated dimensionality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Couplings {
    pub g11: f64,
    pub g22: f64,
    pub g12: f64,
}

impl Couplings {
    /// `g11·g22 − g12²`; positive in the miscible regime.
    pub fn miscibility_margin(&self) -> f64 {
        self.g11 * self.g22 - self.g12 * self.g12
    }

    pub fn is_miscible(&self) -> bool {
        self.miscibility_margin() > 0.0
    }

    pub fn scaled(&self, factor: f64) -> Couplings {
        Couplings {
            g11: self.g11 * factor,
            g22: self.g22 * factor,
            g12: self.g12 * factor,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalSetup {
    /// Total atom number N = N₁ + N₂.
    pub n_total: f64,
    /// Trap angular frequencies (ω_x, ω_y, ω_z) in rad/ms.
    pub trap: [f64; 3],
    /// Intra-component scattering length a in μm.
    pub a_base: f64,
    /// a₁₂ / a.
    pub a12_ratio: f64,
    #[serde(default)]
    pub units: UnitSystem,
}

impl PhysicalSetup {
    /// Elongated trap 2π×{5, 512, 512} Hz with N = 10⁵.
    pub fn elongated() -> Self {
        PhysicalSetup {
            n_total: 1e5,
            trap: [
                hz_to_rad_per_ms(5.0),
                hz_to_rad_per_ms(512.0),
                hz_to_rad_per_ms(512.0),
            ],
            a_base: DEFAULT_SCATTERING_BOHR * BOHR_RADIUS_UM,
            a12_ratio: 0.93,
            units: UnitSystem::default(),
        }
    }

    /// Pancake trap 2π×{50, 50, 1500} Hz with N = 10⁵.
    pub fn pancake() -> Self {
        PhysicalSetup {
            trap: [
                hz_to_rad_per_ms(50.0),
                hz_to_rad_per_ms(50.0),
                hz_to_rad_per_ms(1500.0),
            ],
            ..Self::elongated()
        }
    }

    /// Fully interaction-free mixture in an isotropic trap; used to check the
    /// solvers against the harmonic oscillator.
    pub fn non_interacting(omega: f64) -> Self {
        PhysicalSetup {
            n_total: 2.0,
            trap: [omega; 3],
            a_base: 0.0,
            a12_ratio: 0.0,
            units: UnitSystem::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.n_total.is_finite() && self.n_total > 0.0) {
            return Err(GpfError::Config(format!(
                "atom number must be positive, got {}",
                self.n_total
            )));
        }
        if self.trap.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(GpfError::Config(format!(
                "trap frequencies must be positive, got {:?}",
                self.trap
            )));
        }
        if !self.units.is_valid() {
            return Err(GpfError::Config("ħ/m must be positive".into()));
        }
        if !self.a_base.is_finite() || !self.a12_ratio.is_finite() {
            return Err(GpfError::Config("scattering lengths must be finite".into()));
        }
        if self.a_base < 0.0 {
            return Err(GpfError::Config(format!(
                "attractive intra-component scattering length {} μm is not supported",
                self.a_base
            )));
        }
        if self.a_base > 0.0 && self.a12_ratio * self.a12_ratio >= 1.0 {
            return Err(GpfError::Config(format!(
                "mixture is immiscible at rest (a12/a = {})",
                self.a12_ratio
            )));
        }
        Ok(())
    }

    /// N_j = N/2.
    pub fn atoms_per_component(&self) -> f64 {
        0.5 * self.n_total
    }

    pub fn omega_max(&self) -> f64 {
        self.trap.iter().cloned().fold(0.0, f64::max)
    }

    /// Bare 3D couplings from the rest scattering lengths.
    pub fn couplings_3d(&self) -> Couplings {
        let g = coupling_from_scattering(self.a_base, &self.units);
        Couplings {
            g11: g,
            g22: g,
            g12: g * self.a12_ratio,
        }
    }

    /// Factor turning a 3D coupling into the effective coupling of a run in
    /// `dims` dimensions. Each frozen axis (the trailing `3 − dims` axes) is
    /// assumed to sit in its Gaussian oscillator ground state, which
    /// contributes 1/(√(2π)·l) with l = √(ħ/mω).
    pub fn reduction_factor(&self, dims: usize) -> f64 {
        self.reduction_factor_with(&self.trap, dims)
    }

    /// As [`Self::reduction_factor`] for an instantaneous trap.
    pub fn reduction_factor_with(&self, trap: &[f64; 3], dims: usize) -> f64 {
        trap[dims.min(3)..]
            .iter()
            .map(|&w| 1.0 / ((2.0 * std::f64::consts::PI).sqrt() * self.units.oscillator_length(w)))
            .product()
    }

    /// Rest couplings for a run in `dims` dimensions.
    pub fn couplings(&self, dims: usize) -> Couplings {
        self.couplings_3d().scaled(self.reduction_factor(dims))
    }

    /// Couplings for arbitrary instantaneous scattering lengths (μm).
    pub fn couplings_for(&self, a11: f64, a22: f64, a12: f64, dims: usize) -> Couplings {
        self.couplings_with(a11, a22, a12, &self.trap, dims)
    }

    pub fn couplings_with(&self, a11: f64, a22: f64, a12: f64, trap: &[f64; 3], dims: usize) -> Couplings {
        let f = self.reduction_factor_with(trap, dims);
        Couplings {
            g11: f * coupling_from_scattering(a11, &self.units),
            g22: f * coupling_from_scattering(a22, &self.units),
            g12: f * coupling_from_scattering(a12, &self.units),
        }
    }
}
