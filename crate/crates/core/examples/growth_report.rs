//! Onset, rate, saturation and decline of a synthetic oscillating power
//! series.

use gpf::analysis::{growth_report, GrowthOptions};

fn main() -> gpf::Result<()> {
    let times: Vec<f64> = (0..2000).map(|i| i as f64 * 0.5).collect();
    let values: Vec<f64> = times
        .iter()
        .map(|&t| {
            let envelope = if t < 600.0 { (0.03 * (t - 300.0)).exp() } else { 8103.0 * (-(t - 600.0) / 80.0).exp() };
            1.0 + envelope * (0.6 + 0.4 * (2.4 * t).cos())
        })
        .collect();
    let opts = GrowthOptions {
        envelope_window: 10.0,
        ..Default::default()
    };
    let r = growth_report(&times, &values, &opts)?;
    println!("{r:#?}");
    Ok(())
}
