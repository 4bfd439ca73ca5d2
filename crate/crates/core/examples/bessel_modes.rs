//! Polar Bessel decomposition and (l, n_r) labelling of a synthetic spin
//! pattern J₃(kr)cos3φ inside a disc.

use gpf::analysis::{bessel_decompose, label_mode, BesselOptions, PlanarField};
use gpf::bessel::bessel_j;

fn main() -> gpf::Result<()> {
    let (n, half, radius) = (128, 32.0, 22.0);
    let k0 = 11.5 / radius;
    let dx = 2.0 * half / n as f64;
    let mut values = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let (x, y) = (-half + i as f64 * dx, -half + j as f64 * dx);
            let r = x.hypot(y);
            values.push(if r < radius { bessel_j(3, k0 * r) * (3.0 * y.atan2(x)).cos() } else { 0.0 });
        }
    }
    let field = PlanarField {
        points: [n, n],
        half_widths: [half, half],
        values,
    };
    let d = bessel_decompose(&field, &BesselOptions::default())?;
    for l in 0..=d.l_max {
        println!("l = {l:2}  share {:.4}", d.l_power(l) / d.total_power());
    }
    let m = label_mode(&d, radius);
    println!("label (l, n_r) = ({}, {}), confidence {:.2}, k_peak {:.3}/μm", m.l, m.n_r, m.confidence, m.k_peak);
    Ok(())
}
