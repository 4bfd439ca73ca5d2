//! Shared fixtures and numerical invariant measurements.
#![allow(dead_code)]

use std::f64::consts::PI;

use gpf::analysis::{bessel_decompose, fourier_1d, BesselOptions, PlanarField, Profile1D, ProfileKind};
use gpf::bessel::bessel_j;
use gpf::config::ExperimentConfig;
use gpf::field::BinaryField;
use gpf::grid::Grid;
use gpf::ground::{imaginary_time_solve, initial_profile, inject_noise, GroundStateConfig, InitialProfile, NoiseInjection};
use gpf::mathieu::mathieu_stability;
use gpf::protocol::{instant, ModulationProtocol, PhaseRelation};
use gpf::setup::PhysicalSetup;
use gpf::stepper::SplitStepper;

/// Small elongated mixture on a 1D grid, relaxed to its ground state.
pub fn small_ground_1d() -> (PhysicalSetup, BinaryField) {
    let setup = PhysicalSetup {
        n_total: 2e4,
        ..PhysicalSetup::elongated()
    };
    let grid = Grid::new(&[512], &[160.0]).unwrap();
    let init = initial_profile(&setup, &grid, InitialProfile::ThomasFermi).unwrap();
    let gs = imaginary_time_solve(
        init,
        &setup,
        &GroundStateConfig {
            tolerance: 1e-8,
            ..Default::default()
        },
    )
    .unwrap();
    (setup, gs.field)
}

/// A quick 1D run directory config: fig2 on a small grid for 20 ms.
pub fn quick_config(out: &std::path::Path) -> ExperimentConfig {
    let text = format!(
        r#"
name = "quick"
[setup]
n_total = 2e4
[grid]
points = [512]
half_widths = [160.0]
[ground_state]
tolerance = 1e-8
[evolution]
dt = 0.01
t_final = 20.0
snapshot_stride = 50
checkpoint_stride = 500
[output]
dir = "{}"
field_every = 2
"#,
        out.display()
    );
    let cfg = ExperimentConfig::preset_with("fig2", &text).unwrap();
    cfg.validate().unwrap();
    cfg
}

fn propagate(setup: &PhysicalSetup, protocol: &ModulationProtocol, field: &mut BinaryField, dt: f64, steps: usize) {
    let dims = field.grid.dims();
    let mut stepper = SplitStepper::new(&field.grid, setup.units, setup.trap);
    stepper.advance(field, dt, steps, |t| instant(protocol, setup, dims, t));
}

fn driven() -> ModulationProtocol {
    ModulationProtocol::scattering(PhaseRelation::OutOfPhase, 0.07, gpf::units::hz_to_rad_per_ms(195.0))
}

fn perturbed(field: &BinaryField) -> BinaryField {
    inject_noise(field, &NoiseInjection::modulus(0.01, 7))
}

/// Largest relative change of a component norm over 10³ driven steps.
pub fn norm_drift_per_1000_steps(setup: &PhysicalSetup, ground: &BinaryField) -> f64 {
    let mut f = perturbed(ground);
    let before = f.norms();
    propagate(setup, &driven(), &mut f, 0.01, 1000);
    let after = f.norms();
    (0..2).map(|j| ((after[j] - before[j]) / before[j]).abs()).fold(0.0, f64::max)
}

/// Relative change of the energy over 10³ undriven steps from a perturbed
/// ground state.
pub fn energy_drift(setup: &PhysicalSetup, ground: &BinaryField) -> f64 {
    let c = setup.couplings(ground.grid.dims());
    let mut f = perturbed(ground);
    let mut stepper = SplitStepper::new(&f.grid, setup.units, setup.trap);
    let e0 = stepper.energy(&f, &c).total();
    let rest = ModulationProtocol::scattering(PhaseRelation::InPhase, 0.0, 1.0);
    propagate(setup, &rest, &mut f, 0.001, 1000);
    let e1 = stepper.energy(&f, &c).total();
    ((e1 - e0) / e0).abs()
}

/// Driven forward 500 steps, then backward with −dt; max relative
/// deviation from the start.
pub fn time_reversal_error(setup: &PhysicalSetup, ground: &BinaryField) -> f64 {
    let start = perturbed(ground);
    let mut f = start.clone();
    let p = driven();
    propagate(setup, &p, &mut f, 0.01, 500);
    propagate(setup, &p, &mut f, -0.01, 500);
    f.l2_relative_difference(&start)
}

/// Error ratio e(dt)/e(dt/2) against a dt/16 reference after 2 ms.
pub fn convergence_ratio(setup: &PhysicalSetup, ground: &BinaryField) -> f64 {
    let p = driven();
    let start = perturbed(ground);
    let run = |dt: f64| {
        let mut f = start.clone();
        propagate(setup, &p, &mut f, dt, (2.0 / dt).round() as usize);
        f
    };
    let dt = 0.02;
    let reference = run(dt / 16.0);
    let e1 = run(dt).l2_relative_difference(&reference);
    let e2 = run(dt / 2.0).l2_relative_difference(&reference);
    e1 / e2
}

/// |∫dk|F|²/(2π) − ∫dx f²| / ∫dx f² for a random-looking profile.
pub fn parseval_error(values: Vec<f64>, dx: f64) -> f64 {
    let n = values.len();
    let x: Vec<f64> = (0..n).map(|i| (i as f64 - (n / 2) as f64) * dx).collect();
    let p = Profile1D {
        x,
        values,
        kind: ProfileKind::Spin,
    };
    let f = fourier_1d(&p);
    let lhs = f.amplitude.iter().map(|z| z.norm_sqr()).sum::<f64>() * f.dk() / (2.0 * PI);
    let rhs = p.values.iter().map(|v| v * v).sum::<f64>() * dx;
    (lhs - rhs).abs() / rhs
}

pub fn planar(n: usize, half: f64, f: impl Fn(f64, f64) -> f64) -> PlanarField {
    let dx = 2.0 * half / n as f64;
    let mut values = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            values.push(f(-half + i as f64 * dx, -half + j as f64 * dx));
        }
    }
    PlanarField {
        points: [n, n],
        half_widths: [half, half],
        values,
    }
}

/// Fraction of the Bessel power of a synthetic J₃(kr)cos3φ field found in l = 3.
pub fn bessel_l3_fraction() -> f64 {
    let (rtf, k0) = (22.0, 11.5 / 22.0);
    let f = planar(128, 32.0, |x, y| {
        let r = x.hypot(y);
        if r > rtf {
            0.0
        } else {
            bessel_j(3, k0 * r) * (3.0 * y.atan2(x)).cos()
        }
    });
    let d = bessel_decompose(&f, &BesselOptions::default()).unwrap();
    d.l_power(3) / d.total_power()
}

/// Whether the first Mathieu tongue (ω_m = 2ω₀) is unstable at A = 0.1,
/// and the detuned drive just outside it is stable.
pub fn mathieu_first_tongue() -> (bool, bool) {
    let w0 = 1.0;
    (mathieu_stability(w0, 0.1, 2.0 * w0).unstable, mathieu_stability(w0, 0.1, 2.2 * w0).unstable)
}
