//! In-phase drive of the elongated condensate: the density side peak grows
//! at the wavenumber where ω_m = 2ω_d(k).

use gpf::analysis::{integrate_profile, side_peaks, ProfileKind};
use gpf::config::ExperimentConfig;
use gpf::evolve::{evolve_with, MemoryRecorder, RunStart};
use gpf::experiment::{background_for, solve_ground_state};
use gpf::field::densities;
use gpf::linear::{resonance_k, Channel};

fn main() -> gpf::Result<()> {
    let cfg = ExperimentConfig::preset("fig1")?;
    let (gs, _) = solve_ground_state(&cfg)?;
    let bg = background_for(&cfg, &gs.field);
    let protocol = cfg.protocol();
    println!("predicted k {:.4}/μm", resonance_k(protocol.omega_m, &bg, Channel::Density));
    let reference = densities(&gs.field).total;
    let mut rec = MemoryRecorder::new(25);
    let start = RunStart {
        step: 0,
        reference: Some(reference.clone()),
    };
    evolve_with(&gs.field, &cfg.setup(), &protocol, &cfg.evolution, start, &mut rec)?;
    let k_min = 0.05;
    for f in &rec.snapshots {
        let dn = integrate_profile(f, ProfileKind::DeltaN, Some(&reference))?;
        match side_peaks(&dn, k_min)?.peak() {
            Some(p) => println!("t {:6.1} ms  k {:.4}  amplitude {:.3e}", f.time, p.k, p.amplitude),
            None => println!("t {:6.1} ms  no pattern", f.time),
        }
    }
    Ok(())
}
