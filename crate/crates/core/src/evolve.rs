//! Real-time propagation under a modulation protocol.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::analysis::{
    band_power, bessel_decompose, integrate_profile, label_mode, power_spectrum_1d, spin_column_2d, BesselOptions, ModeLabel,
    ProfileKind,
};
use crate::error::{GpfError, Result};
use crate::field::{densities, BinaryField};
use crate::ground::thomas_fermi;
use crate::protocol::{instant, ModulationProtocol};
use crate::series::TimeSeries;
use crate::setup::PhysicalSetup;
use crate::stepper::SplitStepper;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    Norm1,
    Norm2,
    /// E/ħ with the instantaneous couplings.
    Energy,
    CentralDensity,
    CentralSpin,
    /// max|n_s| / max n.
    SpinRatio,
    /// ∫dk |𝓕 n_s,1D|².
    SpinPower,
    /// ∫dk |𝓕 δn₁D|², δn relative to the run's reference density.
    DensityPower,
    /// As `SpinPower` restricted to |k| ≥ k_min.
    SpinBandPower,
    DensityBandPower,
    /// Σ_l ∫dk_r |P_l|² of n_s,2D (planar runs).
    SpinBesselPower,
    /// (l, n_r) and confidence of the dominant n_s,2D mode.
    SpinModeL,
    SpinModeNr,
    SpinModeConfidence,
}

impl Observable {
    pub fn key(self) -> &'static str {
        match self {
            Observable::Norm1 => "norm1",
            Observable::Norm2 => "norm2",
            Observable::Energy => "energy",
            Observable::CentralDensity => "central_density",
            Observable::CentralSpin => "central_spin",
            Observable::SpinRatio => "spin_ratio",
            Observable::SpinPower => "spin_power",
            Observable::DensityPower => "density_power",
            Observable::SpinBandPower => "spin_band_power",
            Observable::DensityBandPower => "density_band_power",
            Observable::SpinBesselPower => "spin_bessel_power",
            Observable::SpinModeL => "spin_mode_l",
            Observable::SpinModeNr => "spin_mode_nr",
            Observable::SpinModeConfidence => "spin_mode_confidence",
        }
    }

    fn needs_k_min(self) -> bool {
        matches!(self, Observable::SpinBandPower | Observable::DensityBandPower)
    }

    fn needs_label(self) -> bool {
        matches!(
            self,
            Observable::SpinModeL | Observable::SpinModeNr | Observable::SpinModeConfidence
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvolutionConfig {
    /// ms.
    pub dt: f64,
    /// ms.
    pub t_final: f64,
    /// Steps between observable samples and snapshots.
    pub snapshot_stride: u64,
    pub observables: Vec<Observable>,
    /// Steps between checkpoints; 0 disables them.
    pub checkpoint_stride: u64,
    /// Lower wavenumber (μm⁻¹) of the band observables; `None` uses
    /// 2π/(2R_TF) along x.
    pub band_k_min: Option<f64>,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            dt: 0.01,
            t_final: 1.0,
            snapshot_stride: 10,
            observables: vec![
                Observable::Norm1,
                Observable::Norm2,
                Observable::Energy,
                Observable::CentralDensity,
                Observable::SpinRatio,
            ],
            checkpoint_stride: 0,
            band_k_min: None,
        }
    }
}

/// Largest dt·μ accepted.
pub const MAX_PHASE_PER_STEP: f64 = 0.1;
/// Largest kinetic phase dt·(ħ/2m)k²_max accepted; split-step integration
/// of the nonlinear equations goes unstable above π.
pub const MAX_KINETIC_PHASE: f64 = std::f64::consts::PI;
/// Minimum steps per modulation period.
pub const MIN_STEPS_PER_PERIOD: f64 = 64.0;

impl EvolutionConfig {
    pub fn total_steps(&self) -> u64 {
        (self.t_final / self.dt).round() as u64
    }

    /// `mu` is the largest chemical potential of the initial state and
    /// `omega_kin` the kinetic frequency (ħ/2m)k²_max of the grid, both rad/ms.
    pub fn validate(&self, protocol: &ModulationProtocol, mu: f64, omega_kin: f64) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(GpfError::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_final.is_finite() && self.t_final >= 0.0) {
            return Err(GpfError::Config(format!("t_final must be ≥ 0, got {}", self.t_final)));
        }
        let steps = self.t_final / self.dt;
        if (steps - steps.round()).abs() > 1e-6 * steps.max(1.0) {
            return Err(GpfError::Config(format!(
                "t_final = {} is not a multiple of dt = {}",
                self.t_final, self.dt
            )));
        }
        if self.snapshot_stride == 0 {
            return Err(GpfError::Config("snapshot_stride must be positive".into()));
        }
        if protocol.a_m > 0.0 && self.dt > protocol.period() / MIN_STEPS_PER_PERIOD {
            return Err(GpfError::Config(format!(
                "dt = {} ms under-resolves the modulation period {:.4} ms (need ≤ period/{MIN_STEPS_PER_PERIOD})",
                self.dt,
                protocol.period()
            )));
        }
        if self.dt * mu.abs() > MAX_PHASE_PER_STEP {
            return Err(GpfError::Config(format!(
                "dt·μ = {:.4} exceeds {MAX_PHASE_PER_STEP} (μ = {mu:.4} rad/ms)",
                self.dt * mu.abs()
            )));
        }
        if self.dt * omega_kin > MAX_KINETIC_PHASE {
            return Err(GpfError::Config(format!(
                "dt·ħk²_max/2m = {:.3} exceeds π; use dt ≤ {:.5} ms or a coarser grid",
                self.dt * omega_kin,
                MAX_KINETIC_PHASE / omega_kin
            )));
        }
        Ok(())
    }
}

/// Receives states during a run.
pub trait EvolutionObserver {
    fn snapshot(&mut self, _step: u64, _field: &BinaryField) -> Result<()> {
        Ok(())
    }

    /// Persist a restart point together with the series so far; returns
    /// where it was written.
    fn checkpoint(&mut self, _step: u64, _field: &BinaryField, _series: &TimeSeries) -> Result<Option<PathBuf>> {
        Ok(None)
    }
}

/// Keeps every `keep_every`-th snapshot in memory.
#[derive(Debug, Clone)]
pub struct MemoryRecorder {
    pub keep_every: u64,
    pub snapshots: Vec<BinaryField>,
    seen: u64,
}

impl MemoryRecorder {
    pub fn new(keep_every: u64) -> Self {
        MemoryRecorder {
            keep_every: keep_every.max(1),
            snapshots: Vec::new(),
            seen: 0,
        }
    }
}

impl EvolutionObserver for MemoryRecorder {
    fn snapshot(&mut self, _step: u64, field: &BinaryField) -> Result<()> {
        if self.seen.is_multiple_of(self.keep_every) {
            self.snapshots.push(field.clone());
        }
        self.seen += 1;
        Ok(())
    }
}

/// Discards everything.
impl EvolutionObserver for () {}

/// Where a run starts and what δn is measured against.
#[derive(Debug, Clone, Default)]
pub struct RunStart {
    pub step: u64,
    /// Equilibrium total density; `None` uses the density of the starting
    /// field (only meaningful when `step` is 0).
    pub reference: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct Evolution {
    pub final_field: BinaryField,
    pub series: TimeSeries,
    pub snapshots: Vec<BinaryField>,
}

/// Run from step 0 keeping every snapshot in memory.
pub fn evolve(
    field: &BinaryField,
    setup: &PhysicalSetup,
    protocol: &ModulationProtocol,
    cfg: &EvolutionConfig,
) -> Result<Evolution> {
    let mut rec = MemoryRecorder::new(1);
    let (final_field, series) = evolve_with(field, setup, protocol, cfg, RunStart::default(), &mut rec)?;
    Ok(Evolution {
        final_field,
        series,
        snapshots: rec.snapshots,
    })
}

struct Sampler<'a> {
    setup: &'a PhysicalSetup,
    protocol: &'a ModulationProtocol,
    observables: &'a [Observable],
    reference: Vec<f64>,
    k_min: f64,
    tf_radius: f64,
}

impl Sampler<'_> {
    fn row(&self, stepper: &mut SplitStepper, field: &BinaryField) -> Result<Vec<f64>> {
        let dims = field.grid.dims();
        let inst = instant(self.protocol, self.setup, dims, field.time);
        let mut spin = None;
        let mut delta = None;
        let mut decomp = None;
        let mut label = None;
        let mut out = Vec::with_capacity(self.observables.len());
        for &o in self.observables {
            let v = match o {
                Observable::Norm1 => field.norm(0),
                Observable::Norm2 => field.norm(1),
                Observable::Energy => {
                    stepper.set_trap(inst.trap);
                    stepper.energy(field, &inst.couplings).total()
                }
                Observable::CentralDensity => field.central_density(),
                Observable::CentralSpin => {
                    let c = field.grid.center_index();
                    field.psi[0][c].norm_sqr() - field.psi[1][c].norm_sqr()
                }
                Observable::SpinRatio => {
                    let d = densities(field);
                    let n = d.total.iter().cloned().fold(0.0, f64::max);
                    let s = d.spin.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                    if n > 0.0 {
                        s / n
                    } else {
                        0.0
                    }
                }
                Observable::SpinPower | Observable::SpinBandPower => {
                    if spin.is_none() {
                        spin = Some(integrate_profile(field, ProfileKind::Spin, None)?);
                    }
                    let p = spin.as_ref().expect("computed above");
                    if o == Observable::SpinPower {
                        power_spectrum_1d(p)
                    } else {
                        band_power(p, self.k_min)
                    }
                }
                Observable::DensityPower | Observable::DensityBandPower => {
                    if delta.is_none() {
                        delta = Some(integrate_profile(field, ProfileKind::DeltaN, Some(&self.reference))?);
                    }
                    let p = delta.as_ref().expect("computed above");
                    if o == Observable::DensityPower {
                        power_spectrum_1d(p)
                    } else {
                        band_power(p, self.k_min)
                    }
                }
                Observable::SpinBesselPower
                | Observable::SpinModeL
                | Observable::SpinModeNr
                | Observable::SpinModeConfidence => {
                    if decomp.is_none() {
                        decomp = Some(bessel_decompose(&spin_column_2d(field)?, &BesselOptions::default())?);
                    }
                    let d = decomp.as_ref().expect("computed above");
                    if o == Observable::SpinBesselPower {
                        d.total_power()
                    } else {
                        let m: &ModeLabel = label.get_or_insert_with(|| label_mode(d, self.tf_radius));
                        match o {
                            Observable::SpinModeL => m.l as f64,
                            Observable::SpinModeNr => m.n_r as f64,
                            _ => m.confidence,
                        }
                    }
                }
            };
            out.push(v);
        }
        Ok(out)
    }
}

/// Propagate `field` from `start.step` to `cfg.total_steps()`, sampling the
/// requested observables every `snapshot_stride` steps.
///
/// The time after step s is exactly s·dt, and the propagation is split at
/// snapshot and checkpoint boundaries only, so a run resumed from a
/// checkpoint reproduces the uninterrupted run bit for bit.
pub fn evolve_with(
    field: &BinaryField,
    setup: &PhysicalSetup,
    protocol: &ModulationProtocol,
    cfg: &EvolutionConfig,
    start: RunStart,
    observer: &mut dyn EvolutionObserver,
) -> Result<(BinaryField, TimeSeries)> {
    setup.validate()?;
    protocol.validate(setup)?;
    let grid = field.grid.clone();
    let dims = grid.dims();
    let mut state = field.clone();
    state.time = start.step as f64 * cfg.dt;
    let mut stepper = SplitStepper::new(&grid, setup.units, setup.trap);
    let inst0 = instant(protocol, setup, dims, state.time);
    let mu = stepper.chemical_potentials(&state, &inst0.couplings);
    let omega_kin = 0.5 * setup.units.hbar_over_m * grid.k_max_sq();
    cfg.validate(protocol, mu[0].abs().max(mu[1].abs()), omega_kin)?;
    let total = cfg.total_steps();
    if start.step > total {
        return Err(GpfError::Config(format!(
            "start step {} lies beyond the final step {total}",
            start.step
        )));
    }
    let needs_tf = cfg.observables.iter().any(|o| o.needs_label())
        || (cfg.band_k_min.is_none() && cfg.observables.iter().any(|o| o.needs_k_min()));
    let tf_radius = if needs_tf { thomas_fermi(setup, &grid)?.radii[0] } else { 0.0 };
    let k_min = cfg
        .band_k_min
        .unwrap_or(2.0 * std::f64::consts::PI / (2.0 * tf_radius.max(f64::MIN_POSITIVE)));
    let reference = start.reference.unwrap_or_else(|| densities(&state).total);
    let sampler = Sampler {
        setup,
        protocol,
        observables: &cfg.observables,
        reference,
        k_min,
        tf_radius,
    };
    let mut series = TimeSeries::new(cfg.observables.iter().map(|o| o.key().to_string()).collect());
    let mut last_checkpoint: Option<PathBuf> = None;
    let nonfinite = |t: f64, c: &Option<PathBuf>| GpfError::NonFinite {
        time: t,
        checkpoint: c.clone(),
    };
    let mut step = start.step;
    if step == 0 {
        series.push(0, state.time, sampler.row(&mut stepper, &state)?);
        observer.snapshot(0, &state)?;
    }
    let next_multiple = |s: u64, m: u64| (s / m + 1) * m;
    while step < total {
        let mut next = next_multiple(step, cfg.snapshot_stride).min(total);
        if cfg.checkpoint_stride > 0 {
            next = next.min(next_multiple(step, cfg.checkpoint_stride));
        }
        stepper.advance(&mut state, cfg.dt, (next - step) as usize, |t| instant(protocol, setup, dims, t));
        step = next;
        state.time = step as f64 * cfg.dt;
        let snap = step.is_multiple_of(cfg.snapshot_stride) || step == total;
        let ckpt = cfg.checkpoint_stride > 0 && step.is_multiple_of(cfg.checkpoint_stride);
        if (snap || ckpt) && !state.is_finite() {
            return Err(nonfinite(state.time, &last_checkpoint));
        }
        if snap {
            series.push(step, state.time, sampler.row(&mut stepper, &state)?);
            observer.snapshot(step, &state)?;
        }
        if ckpt {
            if let Some(p) = observer.checkpoint(step, &state, &series)? {
                last_checkpoint = Some(p);
            }
        }
    }
    if !state.is_finite() {
        return Err(nonfinite(state.time, &last_checkpoint));
    }
    Ok((state, series))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::ground::{imaginary_time_solve, initial_profile, GroundStateConfig, InitialProfile};
    use crate::protocol::PhaseRelation;

    fn small_1d() -> (PhysicalSetup, BinaryField) {
        let setup = PhysicalSetup {
            n_total: 2e4,
            ..PhysicalSetup::elongated()
        };
        let grid = Grid::new(&[256], &[160.0]).unwrap();
        let init = initial_profile(&setup, &grid, InitialProfile::ThomasFermi).unwrap();
        let gs = imaginary_time_solve(
            init,
            &setup,
            &GroundStateConfig {
                tolerance: 1e-7,
                ..Default::default()
            },
        )
        .unwrap();
        (setup, gs.field)
    }

    #[test]
    fn coarse_dt_is_rejected_before_running() {
        let (setup, f) = small_1d();
        let p = ModulationProtocol::scattering(PhaseRelation::OutOfPhase, 0.07, 2.0);
        let cfg = EvolutionConfig {
            dt: 0.1,
            ..Default::default()
        };
        assert!(matches!(evolve(&f, &setup, &p, &cfg), Err(GpfError::Config(_))));
    }

    #[test]
    fn kinetic_phase_limit() {
        let p = ModulationProtocol::scattering(PhaseRelation::InPhase, 0.36, 2.41);
        let cfg = |dt| EvolutionConfig {
            dt,
            t_final: 1.0,
            ..Default::default()
        };
        // 4096 points over ±256 μm: ħk²_max/2m ≈ 872 rad/ms
        let omega_kin = 0.5 * 2.7625 * (std::f64::consts::PI / 0.125f64).powi(2);
        assert!(cfg(0.0025).validate(&p, 6.9, omega_kin).is_ok());
        let err = cfg(0.01).validate(&p, 6.9, omega_kin).unwrap_err();
        assert!(err.to_string().contains("exceeds π"), "{err}");
    }

    #[test]
    fn samples_every_stride() {
        let (setup, f) = small_1d();
        let p = ModulationProtocol::scattering(PhaseRelation::OutOfPhase, 0.07, 2.0);
        let cfg = EvolutionConfig {
            dt: 0.01,
            t_final: 0.95,
            snapshot_stride: 10,
            ..Default::default()
        };
        let run = evolve(&f, &setup, &p, &cfg).unwrap();
        assert_eq!(run.series.steps.first(), Some(&0));
        assert_eq!(run.series.steps.last(), Some(&95));
        assert_eq!(run.series.len(), 11);
        assert_eq!(run.snapshots.len(), 11);
        assert_eq!(run.final_field.time, 95.0 * 0.01);
    }

    #[test]
    fn nan_aborts_at_first_check() {
        struct Ckpt;
        impl EvolutionObserver for Ckpt {
            fn checkpoint(&mut self, step: u64, _f: &BinaryField, _s: &TimeSeries) -> Result<Option<PathBuf>> {
                Ok(Some(PathBuf::from(format!("ckpt-{step}"))))
            }
        }
        let (setup, mut f) = small_1d();
        let p = ModulationProtocol::default();
        let cfg = EvolutionConfig {
            dt: 0.01,
            t_final: 0.4,
            checkpoint_stride: 10,
            snapshot_stride: 20,
            ..Default::default()
        };
        f.psi[0][3] = num_complex::Complex64::new(f64::NAN, 0.0);
        match evolve_with(&f, &setup, &p, &cfg, RunStart::default(), &mut Ckpt) {
            Err(GpfError::NonFinite { time, checkpoint }) => {
                assert_eq!(time, 0.1);
                assert!(checkpoint.is_none());
            }
            other => panic!("expected NonFinite, got {other:?}"),
        }
    }
}
