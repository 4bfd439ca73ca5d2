//! Write a field as a GPF1 snapshot with its JSON sidecar, read it back,
//! and store its spectrum as a GPFS block.

use gpf::analysis::{fourier_1d, integrate_profile, ProfileKind};
use gpf::config::ExperimentConfig;
use gpf::experiment::solve_ground_state;
use gpf::io::snapshot::{read_sidecar, read_snapshot, write_with_sidecar, SnapshotRole};
use gpf::io::spectral::SpectralBlock;

fn main() -> gpf::Result<()> {
    let cfg = ExperimentConfig::preset_with("fig1", "[grid]\npoints = [1024]\nhalf_widths = [256.0]\n")?;
    let (gs, _) = solve_ground_state(&cfg)?;
    let dir = std::env::temp_dir().join("gpf-example-io");
    let path = dir.join("ground_state.gpf");
    let hash = write_with_sidecar(&path, &gs.field, SnapshotRole::GroundState, 0, &cfg.hash())?;
    let back = read_snapshot(&path)?;
    println!("{} ({hash})", path.display());
    println!("bit-exact: {}", back.psi == gs.field.psi);
    println!("{:#?}", read_sidecar(&path)?);
    let spec = fourier_1d(&integrate_profile(&back, ProfileKind::Spin, None)?);
    let block = SpectralBlock::from_fourier(&spec, back.time, &cfg.hash());
    block.write(&dir.join("ground_state.gpfs"))?;
    println!("spectral block with {} wavenumbers", block.k.len());
    Ok(())
}
