//! Floquet analysis of the damped-free Mathieu oscillator
//! ẍ = −ω₀²(1 + A cos ω_m t) x.

/// Result of one monodromy evaluation.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct MathieuOutcome {
    pub trace: f64,
    pub unstable: bool,
    /// Largest Floquet multiplier modulus.
    pub multiplier: f64,
    /// ln(multiplier) per unit time (1/ms); zero when stable.
    pub growth_rate: f64,
}

pub const STEPS_PER_PERIOD: usize = 2048;

/// Integrates both fundamental solutions over one drive period with RK4.
pub fn mathieu_stability(omega0: f64, amplitude: f64, omega_m: f64) -> MathieuOutcome {
    let period = 2.0 * std::f64::consts::PI / omega_m;
    let h = period / STEPS_PER_PERIOD as f64;
    let rhs = |t: f64, y: [f64; 2]| [y[1], -omega0 * omega0 * (1.0 + amplitude * (omega_m * t).cos()) * y[0]];
    let mut cols = [[1.0, 0.0], [0.0, 1.0]];
    for y in cols.iter_mut() {
        let mut t = 0.0;
        for _ in 0..STEPS_PER_PERIOD {
            let k1 = rhs(t, *y);
            let k2 = rhs(t + 0.5 * h, [y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
            let k3 = rhs(t + 0.5 * h, [y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
            let k4 = rhs(t + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
            for i in 0..2 {
                y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            t += h;
        }
    }
    let trace = cols[0][0] + cols[1][1];
    let unstable = trace.abs() > 2.0;
    let multiplier = if unstable {
        0.5 * (trace.abs() + (trace * trace - 4.0).sqrt())
    } else {
        1.0
    };
    MathieuOutcome {
        trace,
        unstable,
        multiplier,
        growth_rate: multiplier.ln() / period,
    }
}
