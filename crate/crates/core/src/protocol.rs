//! Time-periodic driving of the mixture.

use serde::{Deserialize, Serialize};

use crate::error::{GpfError, Result};
use crate::setup::PhysicalSetup;
use crate::stepper::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ModulationTarget {
    /// Intra-component scattering lengths a₁₁, a₂₂.
    #[default]
    Scattering,
    /// Both transverse trap frequencies.
    TrapTransverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PhaseRelation {
    #[default]
    InPhase,
    OutOfPhase,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModulationProtocol {
    pub target: ModulationTarget,
    pub phase_relation: PhaseRelation,
    /// Modulation depth as a fraction of the rest value.
    pub a_m: f64,
    /// rad/ms.
    pub omega_m: f64,
    pub t_start: f64,
    pub t_end: f64,
    /// Accept cycles that cross g₁₂² ≥ g₁₁g₂₂.
    pub allow_immiscible: bool,
}

impl Default for ModulationProtocol {
    fn default() -> Self {
        ModulationProtocol {
            target: ModulationTarget::Scattering,
            phase_relation: PhaseRelation::InPhase,
            a_m: 0.0,
            omega_m: 1.0,
            t_start: 0.0,
            t_end: f64::INFINITY,
            allow_immiscible: false,
        }
    }
}

impl ModulationProtocol {
    pub fn scattering(phase_relation: PhaseRelation, a_m: f64, omega_m: f64) -> Self {
        ModulationProtocol {
            phase_relation,
            a_m,
            omega_m,
            ..Default::default()
        }
    }

    pub fn trap_transverse(a_m: f64, omega_m: f64) -> Self {
        ModulationProtocol {
            target: ModulationTarget::TrapTransverse,
            a_m,
            omega_m,
            ..Default::default()
        }
    }

    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.omega_m
    }

    /// sin(ω_m t) inside the active window, 0 outside.
    pub fn drive(&self, t: f64) -> f64 {
        if t < self.t_start || t > self.t_end {
            0.0
        } else {
            (self.omega_m * t).sin()
        }
    }

    /// Smallest g₁₁g₂₂ − g₁₂² over a cycle, in units of g².
    pub fn miscibility_floor(&self, a12_ratio: f64) -> f64 {
        let r2 = a12_ratio * a12_ratio;
        match (self.target, self.phase_relation) {
            (ModulationTarget::TrapTransverse, _) => 1.0 - r2,
            (ModulationTarget::Scattering, PhaseRelation::InPhase) => (1.0 - self.a_m).powi(2) - r2,
            (ModulationTarget::Scattering, PhaseRelation::OutOfPhase) => 1.0 - self.a_m * self.a_m - r2,
        }
    }

    pub fn validate(&self, setup: &PhysicalSetup) -> Result<()> {
        if !(self.omega_m.is_finite() && self.omega_m > 0.0) {
            return Err(GpfError::Config(format!("omega_m must be positive, got {}", self.omega_m)));
        }
        if !(self.a_m.is_finite() && (0.0..1.0).contains(&self.a_m)) {
            return Err(GpfError::Config(format!("a_m must lie in [0, 1), got {}", self.a_m)));
        }
        if self.t_start.is_nan() || self.t_end.is_nan() || self.t_end < self.t_start || self.t_start < 0.0 {
            return Err(GpfError::Config(format!(
                "modulation window [{}, {}] is invalid",
                self.t_start, self.t_end
            )));
        }
        let floor = self.miscibility_floor(setup.a12_ratio);
        if floor < 0.0 && !self.allow_immiscible && self.a_m > 0.0 {
            return Err(GpfError::Config(format!(
                "modulation crosses the immiscibility line (min g11·g22 − g12² = {floor:.4} g²); set allow_immiscible to accept"
            )));
        }
        Ok(())
    }
}

/// (a₁₁, a₂₂, a₁₂) in μm at time t.
pub fn scattering_schedule(protocol: &ModulationProtocol, setup: &PhysicalSetup, t: f64) -> (f64, f64, f64) {
    let a = setup.a_base;
    let a12 = setup.a12_ratio * a;
    if protocol.target != ModulationTarget::Scattering {
        return (a, a, a12);
    }
    let s = protocol.a_m * protocol.drive(t);
    let a22 = match protocol.phase_relation {
        PhaseRelation::InPhase => a * (1.0 + s),
        PhaseRelation::OutOfPhase => a * (1.0 - s),
    };
    (a * (1.0 + s), a22, a12)
}

/// (ω_x, ω_y, ω_z) in rad/ms at time t.
pub fn trap_modulation_schedule(protocol: &ModulationProtocol, setup: &PhysicalSetup, t: f64) -> [f64; 3] {
    let mut w = setup.trap;
    if protocol.target == ModulationTarget::TrapTransverse {
        let f = 1.0 + protocol.a_m * protocol.drive(t);
        w[1] *= f;
        w[2] *= f;
    }
    w
}

/// Hamiltonian parameters of a `dims`-dimensional run at time t. For frozen
/// axes the trap enters through the reduced couplings.
pub fn instant(protocol: &ModulationProtocol, setup: &PhysicalSetup, dims: usize, t: f64) -> Instant {
    let (a11, a22, a12) = scattering_schedule(protocol, setup, t);
    let trap = trap_modulation_schedule(protocol, setup, t);
    Instant {
        couplings: setup.couplings_with(a11, a22, a12, &trap, dims),
        trap,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn setup() -> PhysicalSetup {
        PhysicalSetup::elongated()
    }

    #[test]
    fn rest_values_at_zero() {
        let s = setup();
        let p = ModulationProtocol::scattering(PhaseRelation::OutOfPhase, 0.07, 1.2);
        let (a11, a22, a12) = scattering_schedule(&p, &s, 0.0);
        assert_eq!((a11, a22), (s.a_base, s.a_base));
        assert!((a12 - 0.93 * s.a_base).abs() < 1e-18);
    }

    #[test]
    fn out_of_phase_quarter_period() {
        let s = setup();
        let p = ModulationProtocol::scattering(PhaseRelation::OutOfPhase, 0.07, 1.2);
        let (a11, a22, _) = scattering_schedule(&p, &s, 0.25 * p.period());
        assert!((a11 - 1.07 * s.a_base).abs() < 1e-15);
        assert!((a22 - 0.93 * s.a_base).abs() < 1e-15);
    }

    #[test]
    fn outside_window_is_rest() {
        let s = setup();
        let p = ModulationProtocol {
            t_start: 10.0,
            t_end: 20.0,
            ..ModulationProtocol::scattering(PhaseRelation::InPhase, 0.3, 1.0)
        };
        assert_eq!(scattering_schedule(&p, &s, 5.3).0, s.a_base);
        assert_eq!(scattering_schedule(&p, &s, 25.3).0, s.a_base);
        assert_ne!(scattering_schedule(&p, &s, 15.3).0, s.a_base);
    }

    #[test]
    fn trap_quarter_period() {
        let s = setup();
        let p = ModulationProtocol::trap_transverse(0.1, 2.0);
        let w = trap_modulation_schedule(&p, &s, 0.25 * p.period());
        assert_eq!(w[0], s.trap[0]);
        assert!((w[1] / s.trap[1] - 1.1).abs() < 1e-14);
        assert!((w[2] / s.trap[2] - 1.1).abs() < 1e-14);
        let still = ModulationProtocol::trap_transverse(0.0, 2.0);
        assert_eq!(trap_modulation_schedule(&still, &s, 0.3), s.trap);
    }

    #[test]
    fn immiscible_cycles_need_the_flag() {
        let s = setup();
        let mut p = ModulationProtocol::scattering(PhaseRelation::InPhase, 0.36, 2.4);
        assert!(matches!(p.validate(&s), Err(GpfError::Config(_))));
        p.allow_immiscible = true;
        assert!(p.validate(&s).is_ok());
        assert!(ModulationProtocol::scattering(PhaseRelation::OutOfPhase, 0.07, 1.2).validate(&s).is_ok());
        assert!(ModulationProtocol::scattering(PhaseRelation::OutOfPhase, 0.07, 0.0).validate(&s).is_err());
        assert!(ModulationProtocol::scattering(PhaseRelation::OutOfPhase, 1.0, 1.0).validate(&s).is_err());
    }

    proptest! {
        #[test]
        fn in_phase_keeps_components_equal(t in 0.0f64..1e3, am in 0.0f64..0.99, w in 0.01f64..10.0) {
            let s = setup();
            let p = ModulationProtocol::scattering(PhaseRelation::InPhase, am, w);
            let (a11, a22, _) = scattering_schedule(&p, &s, t);
            prop_assert_eq!(a11, a22);
        }

        #[test]
        fn floor_bounds_sampled_cycle(am in 0.0f64..0.5, t in 0.0f64..10.0) {
            let s = setup();
            for rel in [PhaseRelation::InPhase, PhaseRelation::OutOfPhase] {
                let p = ModulationProtocol::scattering(rel, am, 1.0);
                let (a11, a22, a12) = scattering_schedule(&p, &s, t);
                let m = (a11 * a22 - a12 * a12) / (s.a_base * s.a_base);
                prop_assert!(m >= p.miscibility_floor(s.a12_ratio) - 1e-12);
            }
        }
    }
}
