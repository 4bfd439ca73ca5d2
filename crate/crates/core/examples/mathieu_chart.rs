//! Floquet stability of ẍ = −ω₀²(1 + A cos ω_m t)x across the first two
//! tongues, printed as a character map.

use gpf::mathieu::mathieu_stability;

fn main() {
    let w0 = 1.0;
    for ia in (0..=10).rev() {
        let a = 0.05 * ia as f64;
        let row: String = (0..=60)
            .map(|iw| {
                let wm = 0.8 + 0.025 * iw as f64;
                if mathieu_stability(w0, a, wm).unstable {
                    '#'
                } else {
                    '.'
                }
            })
            .collect();
        println!("A={a:.2} {row}");
    }
    println!("       ω_m/ω₀ from 0.8 to 2.3");
}
