//! A short run directory: evolve, interrupt, resume, then analyse.

use gpf::config::ExperimentConfig;
use gpf::experiment::{cmd_analyze, cmd_evolve, run_evolve, EvolveOptions};

fn main() -> gpf::Result<()> {
    let cfg = ExperimentConfig::preset_with(
        "fig2",
        r#"
name = "example-run"
[setup]
n_total = 2e4
[grid]
points = [512]
half_widths = [160.0]
[evolution]
dt = 0.01
t_final = 40.0
snapshot_stride = 100
checkpoint_stride = 1000
"#,
    )?;
    let dir = std::env::temp_dir().join("gpf-example-run");
    let _ = std::fs::remove_dir_all(&dir);
    let first = run_evolve(&cfg, &dir, EvolveOptions { stop_after: Some(2000) })?;
    println!("stopped: {:?} at t = {} ms", first.status, first.final_time);
    let done = cmd_evolve(&cfg, &dir)?;
    println!("resumed from step {:?}: {:?}, {} snapshots", done.resumed_from, done.status, done.snapshots);
    let s = cmd_analyze(&cfg, &dir)?;
    println!("analysed {} snapshots into {:?} under {}", s.analysed, s.tables, dir.join("analysis").display());
    Ok(())
}
