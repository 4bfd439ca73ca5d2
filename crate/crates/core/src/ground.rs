//! Stationary states: Thomas–Fermi initialization, imaginary-time
//! relaxation and seeded noise injection.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{GpfError, Result};
use crate::field::BinaryField;
use crate::grid::Grid;
use crate::setup::PhysicalSetup;
use crate::stepper::{Energy, Instant, SplitStepper};

/// Required ratio between grid half-width and Thomas–Fermi radius.
pub const TF_MARGIN: f64 = 1.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InitialProfile {
    #[default]
    ThomasFermi,
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GroundStateConfig {
    /// Imaginary-time step in ms; `None` selects 10⁻³·2π/ω_max.
    pub dtau: Option<f64>,
    /// Stop once the relative energy change per ms of imaginary time falls
    /// below this value.
    pub tolerance: f64,
    pub max_iters: usize,
    /// Iterations between energy evaluations.
    pub check_every: usize,
    pub init: InitialProfile,
}

impl Default for GroundStateConfig {
    fn default() -> Self {
        GroundStateConfig {
            dtau: None,
            tolerance: 1e-10,
            max_iters: 2_000_000,
            check_every: 20,
            init: InitialProfile::ThomasFermi,
        }
    }
}

impl GroundStateConfig {
    pub fn resolved_dtau(&self, setup: &PhysicalSetup) -> f64 {
        self.dtau
            .unwrap_or(1e-3 * 2.0 * std::f64::consts::PI / setup.omega_max())
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(d) = self.dtau {
            if !(d.is_finite() && d > 0.0) {
                return Err(GpfError::Config(format!("dtau must be positive, got {d}")));
            }
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(GpfError::Config(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.check_every == 0 || self.max_iters == 0 {
            return Err(GpfError::Config("iteration counts must be positive".into()));
        }
        Ok(())
    }
}

/// Thomas–Fermi chemical potential and profile on a grid.
#[derive(Debug, Clone)]
pub struct ThomasFermi {
    pub mu: f64,
    /// Radii per simulated axis, μm.
    pub radii: Vec<f64>,
    /// Total density n_TF on the grid.
    pub total_density: Vec<f64>,
}

/// The Thomas–Fermi total density n_TF = max(0, 2(μ−V)/(g+g12)) with μ
/// found by bisection on the discrete normalization ∫n_TF = N.
pub fn thomas_fermi(setup: &PhysicalSetup, grid: &Grid) -> Result<ThomasFermi> {
    setup.validate()?;
    let c = setup.couplings(grid.dims());
    let gsum = c.g11 + c.g12;
    if gsum <= 0.0 {
        return Err(GpfError::Config(
            "Thomas–Fermi profile needs repulsive g + g12".into(),
        ));
    }
    let coef: Vec<f64> = (0..grid.dims())
        .map(|a| setup.units.trap_coefficient(setup.trap[a]))
        .collect();
    let v = grid.quadratic_form(&coef);
    let dv = grid.cell_volume();
    let atoms = |mu: f64| v.iter().map(|&vi| (mu - vi).max(0.0)).sum::<f64>() * 2.0 * dv / gsum;
    let mut hi = 1.0;
    while atoms(hi) < setup.n_total {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(GpfError::Config("cannot normalize Thomas–Fermi profile".into()));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if atoms(mid) > setup.n_total {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    let mu = 0.5 * (lo + hi);
    let radii: Vec<f64> = coef.iter().map(|c| (mu / c).sqrt()).collect();
    for (a, r) in radii.iter().enumerate() {
        let l = grid.half_widths()[a];
        if r * TF_MARGIN > l {
            return Err(GpfError::Config(format!(
                "grid half-width {l} μm on axis {a} does not contain the Thomas–Fermi radius {r:.2} μm with {:.0}% margin",
                (TF_MARGIN - 1.0) * 100.0
            )));
        }
    }
    let mut total_density: Vec<f64> = v.iter().map(|&vi| 2.0 * (mu - vi).max(0.0) / gsum).collect();
    // absorb the bisection residual so the norm is exact
    let s = setup.n_total / (total_density.iter().sum::<f64>() * dv);
    total_density.iter_mut().for_each(|n| *n *= s);
    Ok(ThomasFermi {
        mu,
        radii,
        total_density,
    })
}

/// Equal-population Thomas–Fermi state with zero phase.
pub fn thomas_fermi_profile(setup: &PhysicalSetup, grid: &Grid) -> Result<BinaryField> {
    let tf = thomas_fermi(setup, grid)?;
    let psi: Vec<Complex64> = tf
        .total_density
        .iter()
        .map(|n| Complex64::new((0.5 * n).sqrt(), 0.0))
        .collect();
    BinaryField::from_components(grid.clone(), psi.clone(), psi)
}

/// Product of harmonic-oscillator ground states on the simulated axes.
pub fn gaussian_profile(setup: &PhysicalSetup, grid: &Grid) -> Result<BinaryField> {
    setup.validate()?;
    let inv_l2: Vec<f64> = (0..grid.dims())
        .map(|a| setup.trap[a] / setup.units.hbar_over_m)
        .collect();
    let arg = grid.quadratic_form(&inv_l2);
    let psi: Vec<Complex64> = arg.iter().map(|q| Complex64::new((-0.5 * q).exp(), 0.0)).collect();
    let mut f = BinaryField::from_components(grid.clone(), psi.clone(), psi)?;
    f.renormalize(setup.atoms_per_component());
    Ok(f)
}

pub fn initial_profile(setup: &PhysicalSetup, grid: &Grid, init: InitialProfile) -> Result<BinaryField> {
    match init {
        InitialProfile::ThomasFermi => thomas_fermi_profile(setup, grid),
        InitialProfile::Gaussian => gaussian_profile(setup, grid),
    }
}

#[derive(Debug, Clone)]
pub struct GroundState {
    pub field: BinaryField,
    pub energy: Energy,
    /// Energy per particle E/(ħN) in rad/ms.
    pub energy_per_particle: f64,
    pub chemical_potentials: [f64; 2],
    pub iterations: usize,
    /// Energy per particle at every check.
    pub energy_trace: Vec<f64>,
}

/// Relax `init` towards the stationary state by imaginary-time propagation.
pub fn imaginary_time_solve(
    init: BinaryField,
    setup: &PhysicalSetup,
    cfg: &GroundStateConfig,
) -> Result<GroundState> {
    setup.validate()?;
    cfg.validate()?;
    let grid = init.grid.clone();
    let dims = grid.dims();
    let inst = Instant {
        couplings: setup.couplings(dims),
        trap: setup.trap,
    };
    let dtau = cfg.resolved_dtau(setup);
    let target = setup.atoms_per_component();
    let mut stepper = SplitStepper::new(&grid, setup.units, setup.trap);
    let mut field = init;
    field.renormalize(target);
    let mut trace = Vec::new();
    let mut e_prev = stepper.energy(&field, &inst.couplings).total() / setup.n_total;
    trace.push(e_prev);
    let mut iterations = 0;
    let mut last_change = f64::INFINITY;
    while iterations < cfg.max_iters {
        for _ in 0..cfg.check_every {
            stepper.step_imaginary(&mut field, dtau, &inst, target);
        }
        iterations += cfg.check_every;
        if !field.is_finite() {
            return Err(GpfError::Numerical(format!(
                "imaginary-time iteration produced non-finite values after {iterations} steps"
            )));
        }
        let e = stepper.energy(&field, &inst.couplings).total() / setup.n_total;
        trace.push(e);
        let rise = e - e_prev;
        if rise > 1e-9 * e.abs().max(1e-300) {
            return Err(GpfError::Numerical(format!(
                "energy increased by {rise:.3e} per particle during imaginary time; reduce dtau ({dtau} ms)"
            )));
        }
        last_change = (rise.abs() / e.abs().max(1e-300)) / (cfg.check_every as f64 * dtau);
        e_prev = e;
        if last_change < cfg.tolerance {
            let energy = stepper.energy(&field, &inst.couplings);
            let mu = stepper.chemical_potentials(&field, &inst.couplings);
            field.time = 0.0;
            return Ok(GroundState {
                field,
                energy,
                energy_per_particle: energy.total() / setup.n_total,
                chemical_potentials: mu,
                iterations,
                energy_trace: trace,
            });
        }
    }
    Err(GpfError::NotConverged {
        iterations,
        last_change,
        energy_trace: trace,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    #[default]
    None,
    Modulus,
    Phase,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseInjection {
    pub kind: NoiseKind,
    /// Relative amplitude η.
    pub eta: f64,
    pub seed: u64,
    /// Global phase (rad) given to a real stationary state before phase
    /// noise is applied, so that φ₀(1+ηδ) is not identically φ₀ = 0.
    pub phase_reference: f64,
}

impl Default for NoiseInjection {
    fn default() -> Self {
        NoiseInjection {
            kind: NoiseKind::None,
            eta: 0.001,
            seed: 0,
            phase_reference: 1.0,
        }
    }
}

impl NoiseInjection {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn modulus(eta: f64, seed: u64) -> Self {
        NoiseInjection {
            kind: NoiseKind::Modulus,
            eta,
            seed,
            ..Self::default()
        }
    }

    pub fn phase(eta: f64, seed: u64) -> Self {
        NoiseInjection {
            kind: NoiseKind::Phase,
            eta,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta.is_finite() && self.eta >= 0.0) {
            return Err(GpfError::Config(format!("noise amplitude must be ≥ 0, got {}", self.eta)));
        }
        Ok(())
    }
}

/// Multiply the modulus (ψ → √n₀(1+ηδ)e^{iφ₀}) or the phase
/// (ψ → √n₀ e^{iφ₀(1+ηδ)}) by i.i.d. standard-normal δ per point and
/// component, then restore the component norms.
/// Phases below this are treated as those of a real state.
const PHASE_ZERO: f64 = 1e-9;

pub fn inject_noise(field: &BinaryField, spec: &NoiseInjection) -> BinaryField {
    let mut out = field.clone();
    if spec.kind == NoiseKind::None || spec.eta == 0.0 {
        return out;
    }
    let norms = field.norms();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for psi in out.psi.iter_mut() {
        for z in psi.iter_mut() {
            let delta: f64 = StandardNormal.sample(&mut rng);
            match spec.kind {
                NoiseKind::Modulus => *z *= 1.0 + spec.eta * delta,
                NoiseKind::Phase => {
                    let (r, mut phi) = z.to_polar();
                    // imaginary-time states carry round-off phases ~1e-17
                    if phi.abs() < PHASE_ZERO {
                        phi = spec.phase_reference;
                    }
                    *z = Complex64::from_polar(r, phi * (1.0 + spec.eta * delta));
                }
                NoiseKind::None => unreachable!(),
            }
        }
    }
    for (j, n) in norms.iter().enumerate() {
        out.renormalize_component(j, *n);
    }
    out
}
