//! In-phase drives of the elongated condensate at three frequencies, one
//! per worker thread, with the side peak read during linear growth.

use gpf::config::ExperimentConfig;
use gpf::experiment::cmd_sweep;

fn main() -> gpf::Result<()> {
    let mut cfg = ExperimentConfig::preset_with(
        "fig1",
        r#"
name = "example-sweep"
[grid]
points = [2048]
half_widths = [256.0]
[evolution]
dt = 0.005
snapshot_stride = 200
checkpoint_stride = 20000
"#,
    )?;
    cfg.sweep.frequencies_hz = vec![300.0, 384.0, 480.0];
    let dir = std::env::temp_dir().join("gpf-example-sweep");
    let t = cmd_sweep(&cfg, &dir)?;
    print!("{}", t.to_text());
    Ok(())
}
