mod common;

use std::sync::OnceLock;

use gpf::field::BinaryField;
use gpf::linear::{sound_and_healing, Background, Channel};
use gpf::setup::PhysicalSetup;
use gpf::units::UnitSystem;
use proptest::prelude::*;

fn ground() -> &'static (PhysicalSetup, BinaryField) {
    static G: OnceLock<(PhysicalSetup, BinaryField)> = OnceLock::new();
    G.get_or_init(common::small_ground_1d)
}

#[test]
fn norm_is_conserved_under_drive() {
    let (s, g) = ground();
    let d = common::norm_drift_per_1000_steps(s, g);
    assert!(d < 1e-10, "drift {d:e}");
}

#[test]
fn energy_is_conserved_without_drive() {
    let (s, g) = ground();
    let d = common::energy_drift(s, g);
    assert!(d < 1e-8, "drift {d:e}");
}

#[test]
fn driven_evolution_is_time_reversible() {
    let (s, g) = ground();
    let e = common::time_reversal_error(s, g);
    assert!(e < 1e-8, "error {e:e}");
}

#[test]
fn splitting_is_second_order() {
    let (s, g) = ground();
    let r = common::convergence_ratio(s, g);
    assert!((r - 4.0).abs() < 1.0, "ratio {r}");
}

#[test]
fn bessel_projection_isolates_l3() {
    let f = common::bessel_l3_fraction();
    assert!(f >= 0.95, "fraction {f}");
}

#[test]
fn mathieu_first_tongue_is_unstable_and_its_flank_stable() {
    assert_eq!(common::mathieu_first_tongue(), (true, false));
}

#[test]
fn spin_to_density_ratios_at_g12_093() {
    let g = 1.0;
    let c = gpf::setup::Couplings {
        g11: g,
        g22: g,
        g12: 0.93 * g,
    };
    let bg = Background::new(100.0, &c, UnitSystem::default());
    let (cd, xd) = sound_and_healing(&bg, Channel::Density);
    let (cs, xs) = sound_and_healing(&bg, Channel::Spin);
    // independent closed forms: √((1−r)/(1+r)) and its inverse
    let r: f64 = 0.93;
    assert!((cs / cd - ((1.0 - r) / (1.0 + r)).sqrt()).abs() < 1e-12);
    assert!((xs / xd - ((1.0 + r) / (1.0 - r)).sqrt()).abs() < 1e-12);
    assert!((cs / cd - 0.1904).abs() < 1e-4);
    assert!((xs / xd - 5.251).abs() < 1e-3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn parseval_holds_for_arbitrary_profiles(
        values in prop::collection::vec(-1e3..1e3f64, 64..=64),
        dx in 0.01..2.0f64,
    ) {
        prop_assume!(values.iter().any(|v| v.abs() > 1e-3));
        prop_assert!(common::parseval_error(values, dx) < 1e-10);
    }

    #[test]
    fn ratios_depend_only_on_the_coupling_ratio(n in 1.0..1e4f64, g in 1e-4..1.0f64, r in 0.0..0.99f64) {
        let c = gpf::setup::Couplings { g11: g, g22: g, g12: r * g };
        let bg = Background::new(n, &c, UnitSystem::default());
        let (cd, _) = sound_and_healing(&bg, Channel::Density);
        let (cs, _) = sound_and_healing(&bg, Channel::Spin);
        prop_assert!((cs / cd - ((1.0 - r) / (1.0 + r)).sqrt()).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn norm_is_conserved_for_any_drive(a_m in 0.0..0.3f64, f_hz in 20.0..600.0f64, in_phase in any::<bool>()) {
        use gpf::protocol::{instant, ModulationProtocol, PhaseRelation};
        let (s, g) = ground();
        let rel = if in_phase { PhaseRelation::InPhase } else { PhaseRelation::OutOfPhase };
        let p = ModulationProtocol::scattering(rel, a_m, gpf::units::hz_to_rad_per_ms(f_hz));
        let mut f = g.clone();
        let before = f.norms();
        let mut st = gpf::stepper::SplitStepper::new(&f.grid, s.units, s.trap);
        st.advance(&mut f, 0.01, 300, |t| instant(&p, s, 1, t));
        let after = f.norms();
        for j in 0..2 {
            prop_assert!(((after[j] - before[j]) / before[j]).abs() < 1e-11);
        }
    }

    #[test]
    fn component_swap_symmetry_of_out_of_phase_drive(f_hz in 50.0..400.0f64) {
        // exchanging the components and shifting by half a period maps the
        // out-of-phase evolution onto itself
        use gpf::protocol::{instant, ModulationProtocol, PhaseRelation};
        let (s, g) = ground();
        let w = gpf::units::hz_to_rad_per_ms(f_hz);
        let p = ModulationProtocol { t_start: f64::NEG_INFINITY, ..ModulationProtocol::scattering(PhaseRelation::OutOfPhase, 0.1, w) };
        let half = std::f64::consts::PI / w;
        let mut a = gpf::ground::inject_noise(g, &gpf::ground::NoiseInjection::modulus(0.01, 3));
        let mut b = a.clone();
        b.psi.swap(0, 1);
        b.time = half;
        let steps = 200;
        let dt = 0.005;
        let mut st = gpf::stepper::SplitStepper::new(&a.grid, s.units, s.trap);
        st.advance(&mut a, dt, steps, |t| instant(&p, s, 1, t));
        st.advance(&mut b, dt, steps, |t| instant(&p, s, 1, t));
        b.psi.swap(0, 1);
        b.time = a.time;
        prop_assert!(a.l2_relative_difference(&b) < 1e-10);
    }
}
