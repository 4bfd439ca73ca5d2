//! Bogoliubov branches and resonant wavenumbers at the central density of
//! the elongated ground state.

use gpf::config::ExperimentConfig;
use gpf::experiment::{background_for, dispersion_tables, solve_ground_state};
use gpf::linear::{sound_and_healing, Channel};

fn main() -> gpf::Result<()> {
    let mut cfg = ExperimentConfig::preset("fig2")?;
    cfg.dispersion.n_k = 10;
    cfg.dispersion.frequencies_hz = vec![195.0, 384.0];
    let (gs, _) = solve_ground_state(&cfg)?;
    let bg = background_for(&cfg, &gs.field);
    let (c_d, xi_d) = sound_and_healing(&bg, Channel::Density);
    let (c_s, xi_s) = sound_and_healing(&bg, Channel::Spin);
    println!("n_bar {:.3}/μm  c_d {c_d:.4}  c_s {c_s:.4} μm/ms  ξ_d {xi_d:.4}  ξ_s {xi_s:.4} μm", bg.n_bar);
    let t = dispersion_tables(&cfg, &bg);
    print!("{}", t.dispersion.to_text());
    print!("{}", t.resonances.to_text());
    Ok(())
}
