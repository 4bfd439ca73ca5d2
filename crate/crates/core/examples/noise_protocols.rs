//! Initial states of the three drive protocols: the clean ground state,
//! modulus noise and phase noise, with the spin content each one seeds.

use gpf::analysis::{integrate_profile, power_spectrum_1d, ProfileKind};
use gpf::config::ExperimentConfig;
use gpf::experiment::solve_ground_state;
use gpf::ground::{inject_noise, NoiseInjection};

fn main() -> gpf::Result<()> {
    let cfg = ExperimentConfig::preset_with("fig2", "[grid]\npoints = [2048]\nhalf_widths = [256.0]\n")?;
    let (gs, _) = solve_ground_state(&cfg)?;
    for (name, noise) in [
        ("A none", NoiseInjection::none()),
        ("B modulus", NoiseInjection::modulus(0.001, 1)),
        ("C phase", NoiseInjection::phase(0.001, 1)),
    ] {
        let f = inject_noise(&gs.field, &noise);
        let spin = integrate_profile(&f, ProfileKind::Spin, None)?;
        println!("{name:10} norms {:?}  spin power {:.3e}", f.norms(), power_spectrum_1d(&spin));
    }
    Ok(())
}
