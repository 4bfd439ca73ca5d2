use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use super::profile::Profile1D;
use crate::error::{GpfError, Result};

/// Continuous-convention transform F(k) = ∫dx f(x) e^{−ikx}, sampled on the
/// FFT wavenumbers (FFT order).
#[derive(Debug, Clone)]
pub struct Fourier1D {
    pub k: Vec<f64>,
    pub amplitude: Vec<Complex64>,
}

impl Fourier1D {
    pub fn dk(&self) -> f64 {
        self.k[1] - self.k[0]
    }
}

pub fn fourier_1d(profile: &Profile1D) -> Fourier1D {
    let n = profile.values.len();
    let dx = profile.dx();
    let mut buf: Vec<Complex64> = profile.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let dk = 2.0 * std::f64::consts::PI / (n as f64 * dx);
    let x0 = profile.x[0];
    let mut k = Vec::with_capacity(n);
    for (m, z) in buf.iter_mut().enumerate() {
        let km = if m <= n / 2 { m as f64 * dk } else { (m as f64 - n as f64) * dk };
        k.push(km);
        *z *= Complex64::from_polar(dx, -km * x0);
    }
    Fourier1D { k, amplitude: buf }
}

/// ∫dk |F(k)|² over all sampled k. Equals 2π∫dx f² by Parseval.
pub fn power_spectrum_1d(profile: &Profile1D) -> f64 {
    let f = fourier_1d(profile);
    f.amplitude.iter().map(|z| z.norm_sqr()).sum::<f64>() * f.dk()
}

/// As [`power_spectrum_1d`] restricted to |k| ≥ k_min.
pub fn band_power(profile: &Profile1D, k_min: f64) -> f64 {
    let f = fourier_1d(profile);
    f.k.iter()
        .zip(&f.amplitude)
        .filter(|(k, _)| k.abs() >= k_min)
        .map(|(_, z)| z.norm_sqr())
        .sum::<f64>()
        * f.dk()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SidePeak {
    /// Interpolated peak position, μm⁻¹ (positive branch).
    pub k: f64,
    pub amplitude: f64,
    /// Full width at half maximum of |F|, μm⁻¹.
    pub width: f64,
    /// Peak over the median spectral floor.
    pub contrast: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum PeakResult {
    Pattern(SidePeak),
    NoPattern { floor: f64, max: f64 },
}

impl PeakResult {
    pub fn peak(&self) -> Option<&SidePeak> {
        match self {
            PeakResult::Pattern(p) => Some(p),
            PeakResult::NoPattern { .. } => None,
        }
    }
}

/// Smoothing half-width (bins) of the spectrum used for the floor test only.
const DETECTION_SMOOTHING: usize = 2;
const FLOOR_FACTOR: f64 = 3.0;

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Dominant side peak of |F(k)| for k ≥ k_min (the spectrum of a real
/// profile is symmetric).
///
/// A pattern is reported only if the smoothed spectrum rises above
/// 3× the median floor; smoothing keeps white noise below the threshold.
pub fn side_peaks(profile: &Profile1D, k_min: f64) -> Result<PeakResult> {
    let n = profile.values.len();
    if n < 64 {
        return Err(GpfError::Analysis(format!("profile has {n} points, need at least 64")));
    }
    let f = fourier_1d(profile);
    let dk = f.dk();
    let start = ((k_min / dk).ceil() as usize).max(1);
    let stop = n / 2;
    if start + 2 >= stop {
        return Err(GpfError::Analysis(format!("k_min = {k_min} leaves no spectral window")));
    }
    let mag: Vec<f64> = (start..=stop).map(|m| f.amplitude[m].norm()).collect();
    let smooth: Vec<f64> = (0..mag.len())
        .map(|i| {
            let lo = i.saturating_sub(DETECTION_SMOOTHING);
            let hi = (i + DETECTION_SMOOTHING).min(mag.len() - 1);
            mag[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect();
    let floor = median(&mut mag.clone());
    let smax = smooth.iter().cloned().fold(0.0, f64::max);
    let (imax, &peak) = mag
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty window");
    if !(smax > FLOOR_FACTOR * floor) || peak == 0.0 {
        return Ok(PeakResult::NoPattern { floor, max: peak });
    }
    let mut offset = 0.0;
    let mut amplitude = peak;
    if imax > 0 && imax + 1 < mag.len() && mag[imax - 1] > 0.0 && mag[imax + 1] > 0.0 {
        let (a, b, c) = (mag[imax - 1].ln(), peak.ln(), mag[imax + 1].ln());
        let den = a - 2.0 * b + c;
        if den < 0.0 {
            offset = (0.5 * (a - c) / den).clamp(-0.5, 0.5);
            amplitude = (b - 0.25 * (a - c) * offset).exp();
        }
    }
    let k = (start + imax) as f64 * dk + offset * dk;
    let half = 0.5 * peak;
    let crossing = |dir: isize| -> f64 {
        let mut i = imax as isize;
        loop {
            let j = i + dir;
            if j < 0 || j as usize >= mag.len() {
                return (i - imax as isize).unsigned_abs() as f64;
            }
            if mag[j as usize] < half {
                let (y0, y1) = (mag[i as usize], mag[j as usize]);
                let frac = (y0 - half) / (y0 - y1);
                return (i - imax as isize).unsigned_abs() as f64 + frac;
            }
            i = j;
        }
    };
    let width = (crossing(-1) + crossing(1)) * dk;
    Ok(PeakResult::Pattern(SidePeak {
        k,
        amplitude,
        width,
        contrast: peak / floor.max(f64::MIN_POSITIVE),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::ProfileKind;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    fn profile(values: Vec<f64>, dx: f64) -> Profile1D {
        let n = values.len();
        let x = (0..n).map(|i| (i as f64 - (n / 2) as f64) * dx).collect();
        Profile1D {
            x,
            values,
            kind: ProfileKind::Spin,
        }
    }

    fn sinusoid(k: f64, n: usize, dx: f64) -> Profile1D {
        let p = profile(vec![0.0; n], dx);
        let v = p.x.iter().map(|x| (k * x).cos()).collect();
        profile(v, dx)
    }

    #[test]
    fn sinusoid_peak_within_one_bin() {
        let p = sinusoid(2.0 * std::f64::consts::PI / 17.95, 2048, 0.25);
        let peak = *side_peaks(&p, 0.05).unwrap().peak().unwrap();
        let dk = 2.0 * std::f64::consts::PI / p.length();
        assert!((peak.k - 0.35).abs() < dk, "k = {}", peak.k);
    }

    #[test]
    fn white_noise_has_no_pattern() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let v = (0..2048).map(|_| StandardNormal.sample(&mut rng)).collect();
            let r = side_peaks(&profile(v, 0.25), 0.05).unwrap();
            assert!(r.peak().is_none(), "{r:?}");
        }
    }

    #[test]
    fn zero_profile_has_zero_power() {
        assert_eq!(power_spectrum_1d(&profile(vec![0.0; 128], 0.5)), 0.0);
    }

    #[test]
    fn short_profile_is_rejected() {
        assert!(side_peaks(&profile(vec![1.0; 32], 0.5), 0.1).is_err());
    }

    #[test]
    fn band_excludes_low_k() {
        let p = sinusoid(2.0 * std::f64::consts::PI / 64.0, 256, 0.5);
        assert!(band_power(&p, 0.2) < 1e-20 * power_spectrum_1d(&p).max(1.0));
    }

    proptest! {
        #[test]
        fn parseval(values in prop::collection::vec(-10.0f64..10.0, 64..300), dx in 0.05f64..2.0) {
            let p = profile(values, dx);
            let direct = 2.0 * std::f64::consts::PI * dx * p.values.iter().map(|v| v * v).sum::<f64>();
            let spectral = power_spectrum_1d(&p);
            prop_assert!((spectral - direct).abs() <= 1e-10 * direct.max(1e-300));
        }

        #[test]
        fn hermitian_for_real_input(values in prop::collection::vec(-1.0f64..1.0, 64..128)) {
            let f = fourier_1d(&profile(values, 0.3));
            let n = f.k.len();
            for m in 1..n {
                let d = f.amplitude[m] - f.amplitude[n - m].conj();
                prop_assert!(d.norm() < 1e-9);
            }
        }

        #[test]
        fn peak_invariant_under_scaling(alpha in 1e-3f64..1e3) {
            let p = sinusoid(0.6, 1024, 0.25);
            let mut q = p.clone();
            q.values.iter_mut().for_each(|v| *v *= alpha);
            let a = side_peaks(&p, 0.05).unwrap().peak().unwrap().k;
            let b = side_peaks(&q, 0.05).unwrap().peak().unwrap().k;
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
