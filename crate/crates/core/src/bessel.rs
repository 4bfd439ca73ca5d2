//! Integer-order Bessel functions of the first kind.

/// J_0(x) … J_{n_max}(x) by Miller's downward recurrence, normalized with
/// J_0 + 2·Σ_{k≥1} J_{2k} = 1. Stable for every order and argument.
pub fn bessel_j_table(n_max: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; n_max + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let ax = x.abs();
    let top = (n_max as f64).max(ax);
    let mut m = (top + 20.0 + (40.0 * top).sqrt()) as usize;
    m += m % 2;
    let (mut jp1, mut j) = (0.0f64, 1e-300f64);
    let mut norm = 0.0;
    for k in (1..=m).rev() {
        let jm1 = 2.0 * k as f64 / ax * j - jp1;
        jp1 = j;
        j = jm1;
        // `j` is now J_{k-1}.
        if k - 1 <= n_max {
            out[k - 1] = j;
        }
        if (k - 1) % 2 == 0 && k > 1 {
            norm += 2.0 * j;
        }
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp1 *= 1e-250;
            norm *= 1e-250;
            for v in out.iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    norm += j;
    for v in out.iter_mut() {
        *v /= norm;
    }
    if x < 0.0 {
        for (n, v) in out.iter_mut().enumerate() {
            if n % 2 == 1 {
                *v = -*v;
            }
        }
    }
    out
}

pub fn bessel_j(n: usize, x: f64) -> f64 {
    bessel_j_table(n, x)[n]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// J_n(x) = (1/π)∫_0^π cos(nτ − x sin τ) dτ, trapezoid on the periodic
    /// integrand (spectrally accurate).
    fn integral_oracle(n: usize, x: f64) -> f64 {
        let m = 4096;
        let h = 2.0 * std::f64::consts::PI / m as f64;
        (0..m)
            .map(|i| {
                let t = i as f64 * h;
                (n as f64 * t - x * t.sin()).cos()
            })
            .sum::<f64>()
            * h
            / (2.0 * std::f64::consts::PI)
    }

    #[test]
    fn known_values() {
        assert!((bessel_j(0, 1.0) - 0.765_197_686_557_966_6).abs() < 1e-14);
        assert!((bessel_j(1, 1.0) - 0.440_050_585_744_933_5).abs() < 1e-14);
        assert!((bessel_j(3, 10.0) - 0.058_379_379_305_186_81).abs() < 1e-13);
        assert!(bessel_j(0, 2.404_825_557_695_773).abs() < 1e-14);
    }

    #[test]
    fn zero_argument() {
        let t = bessel_j_table(5, 0.0);
        assert_eq!(t, vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }

    proptest! {
        #[test]
        fn matches_integral_representation(n in 0usize..12, x in 0.0f64..80.0) {
            let t = bessel_j_table(11, x);
            prop_assert!((t[n] - integral_oracle(n, x)).abs() < 1e-12);
        }

        #[test]
        fn parity(n in 0usize..8, x in 0.01f64..30.0) {
            let s = if n % 2 == 0 { 1.0 } else { -1.0 };
            prop_assert!((bessel_j(n, -x) - s * bessel_j(n, x)).abs() < 1e-14);
        }
    }
}
