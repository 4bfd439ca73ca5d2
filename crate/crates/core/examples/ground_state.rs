//! Stationary state of the elongated mixture on its 1D grid, compared
//! with the Thomas-Fermi profile.

use gpf::config::ExperimentConfig;
use gpf::experiment::solve_ground_state;

fn main() -> gpf::Result<()> {
    let cfg = ExperimentConfig::preset("fig1")?;
    let (gs, report) = solve_ground_state(&cfg)?;
    println!("iterations        {}", report.iterations);
    println!("mu (rad/ms)       {:.5}", report.chemical_potentials[0]);
    println!("E/N (rad/ms)      {:.5}", report.energy_per_particle);
    println!("n(0) (1/μm)       {:.3}", report.central_density);
    if let Some(tf) = &report.thomas_fermi {
        println!("TF mu, n(0)       {:.5}, {:.3}", tf.mu, tf.central_density);
        println!("TF radius (μm)    {:.2}", tf.radii[0]);
        println!("n(0) vs TF        {:+.3}%", 100.0 * tf.central_density_rel_diff);
    }
    println!("norms             {:?}", gs.field.norms());
    Ok(())
}
