use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::polar::{bessel_decompose, label_mode, BesselOptions, PlanarField};
use crate::error::{GpfError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GrowthOptions {
    /// Onset is the first crossing of this multiple of the initial median.
    pub onset_factor: f64,
    /// Leading fraction of the time span whose median is the baseline.
    pub baseline_fraction: f64,
    /// Trailing running-maximum window (ms) applied before the analysis,
    /// to follow the envelope of oscillating power; 0 disables it.
    pub envelope_window: f64,
    /// A decline is a drop below this fraction of the running maximum.
    pub decline_factor: f64,
    /// A decline is sustained once it lasts this long (ms).
    pub sustain: f64,
}

impl Default for GrowthOptions {
    fn default() -> Self {
        GrowthOptions {
            onset_factor: 10.0,
            baseline_fraction: 0.05,
            envelope_window: 0.0,
            decline_factor: 0.5,
            sustain: 20.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthReport {
    pub t_onset: f64,
    /// Exponential rate (1/ms) of the least-squares line through log(series)
    /// between onset and peak.
    pub rate: f64,
    pub t_peak: f64,
    /// First time after onset that the envelope reaches `decline_factor`
    /// of the peak value; marks the end of the growth window even when
    /// the series plateaus instead of declining.
    pub t_saturation: f64,
    pub saturation_value: f64,
    pub baseline: f64,
    /// False when the series never crossed the onset threshold; `rate` is 0.
    pub crossed: bool,
    /// False when no sustained decline followed the peak.
    pub declined: bool,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn envelope(times: &[f64], values: &[f64], window: f64) -> Vec<f64> {
    if window <= 0.0 {
        return values.to_vec();
    }
    let mut start = 0;
    (0..values.len())
        .map(|i| {
            while times[i] - times[start] > window {
                start += 1;
            }
            values[start..=i].iter().cloned().fold(f64::MIN, f64::max)
        })
        .collect()
}

/// Onset, exponential rate and saturation of a growing power series.
pub fn growth_report(times: &[f64], values: &[f64], opts: &GrowthOptions) -> Result<GrowthReport> {
    let n = values.len();
    if n < 50 || times.len() != n {
        return Err(GpfError::Analysis(format!(
            "growth analysis needs ≥ 50 matched samples, got {n} values and {} times",
            times.len()
        )));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(GpfError::Analysis("sample times must increase".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(GpfError::Analysis("series contains non-finite values".into()));
    }
    let env = envelope(times, values, opts.envelope_window);
    let t0 = times[0];
    let span = times[n - 1] - t0;
    let base_n = times
        .iter()
        .take_while(|&&t| t - t0 <= opts.baseline_fraction * span)
        .count()
        .max(5);
    let baseline = median(env[..base_n].to_vec());
    let global = |from: usize| {
        (from..n)
            .max_by(|&a, &b| env[a].total_cmp(&env[b]))
            .expect("non-empty")
    };
    let threshold = opts.onset_factor * baseline;
    let Some(onset) = (0..n).find(|&i| env[i] > threshold) else {
        let p = global(0);
        return Ok(GrowthReport {
            t_onset: times[p],
            rate: 0.0,
            t_peak: times[p],
            t_saturation: times[p],
            saturation_value: env[p],
            baseline,
            crossed: false,
            declined: false,
        });
    };
    let mut peak = onset;
    let mut below_since: Option<usize> = None;
    let mut declined = false;
    for i in onset..n {
        if env[i] > env[peak] {
            peak = i;
            below_since = None;
        } else if env[i] < opts.decline_factor * env[peak] {
            let s = *below_since.get_or_insert(i);
            if times[i] - times[s] >= opts.sustain {
                declined = true;
                break;
            }
        } else {
            below_since = None;
        }
    }
    if !declined {
        peak = global(onset);
    }
    let pts: Vec<(f64, f64)> = (onset..=peak)
        .filter(|&i| env[i] > 0.0)
        .map(|i| (times[i], env[i].ln()))
        .collect();
    let rate = if pts.len() >= 2 {
        let m = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
        let (mx, my) = (sx / m, sy / m);
        let (sxy, sxx) = pts
            .iter()
            .fold((0.0, 0.0), |(a, b), p| (a + (p.0 - mx) * (p.1 - my), b + (p.0 - mx).powi(2)));
        if sxx > 0.0 {
            sxy / sxx
        } else {
            0.0
        }
    } else {
        0.0
    };
    let sat = (onset..=peak)
        .find(|&i| env[i] >= opts.decline_factor * env[peak])
        .unwrap_or(peak);
    Ok(GrowthReport {
        t_onset: times[onset],
        rate,
        t_peak: times[peak],
        t_saturation: times[sat],
        saturation_value: env[peak],
        baseline,
        crossed: true,
        declined,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubharmonicReport {
    /// Response period over modulation period.
    pub ratio: f64,
    /// Dominant angular frequency (rad/ms) of the signed mode amplitude.
    pub response_omega: f64,
    /// Correlation of n_s,2D with itself one modulation period later.
    pub correlation_one_period: Option<f64>,
    pub correlation_two_periods: Option<f64>,
    pub confidence: f64,
}

fn correlation(a: &PlanarField, b: &PlanarField) -> f64 {
    let (mut ab, mut aa, mut bb) = (0.0, 0.0, 0.0);
    for (x, y) in a.values.iter().zip(&b.values) {
        ab += x * y;
        aa += x * x;
        bb += y * y;
    }
    ab / (aa * bb).sqrt().max(f64::MIN_POSITIVE)
}

/// Period of the l-pattern's oscillation in units of 2π/ω_m, from the
/// projection c(t) = ∫dφ∫dr r n_s J_l(k r) e^{−ilφ} at `k_peak`.
pub fn subharmonic_check(
    samples: &[(f64, PlanarField)],
    l: usize,
    k_peak: f64,
    omega_m: f64,
    tf_radius: f64,
) -> Result<SubharmonicReport> {
    let period = 2.0 * std::f64::consts::PI / omega_m;
    if samples.len() < 8 {
        return Err(GpfError::Analysis("need at least 8 snapshots".into()));
    }
    let span = samples[samples.len() - 1].0 - samples[0].0;
    if span < 2.0 * period * (1.0 - 1e-9) {
        return Err(GpfError::Analysis(format!(
            "snapshots span {span:.3} ms, less than two modulation periods ({:.3} ms)",
            2.0 * period
        )));
    }
    let stride = samples[1].0 - samples[0].0;
    let per = period / stride;
    if (per - per.round()).abs() > 1e-6 * per {
        log::warn!("snapshot stride {stride} ms does not divide the modulation period {period} ms");
    }
    let opts = BesselOptions {
        l_max: l,
        k_max: k_peak,
        n_k: 1,
        ..Default::default()
    };
    let c: Vec<Complex64> = samples
        .iter()
        .map(|(_, f)| bessel_decompose(f, &opts).map(|d| d.p[l][0]))
        .collect::<Result<_>>()?;
    let strongest = (0..c.len()).max_by(|&a, &b| c[a].norm().total_cmp(&c[b].norm())).expect("non-empty");
    let full = bessel_decompose(&samples[strongest].1, &BesselOptions::default())?;
    let label = label_mode(&full, tf_radius);
    let confidence = full.l_power(l) / full.total_power().max(f64::MIN_POSITIVE);
    if label.l != l || confidence < 0.5 {
        return Err(GpfError::Analysis(format!(
            "angular phase of l = {l} is ambiguous: dominant l = {}, l-power fraction {confidence:.2}",
            label.l
        )));
    }
    let s2: Complex64 = c.iter().map(|z| z * z).sum();
    let rot = Complex64::from_polar(1.0, -0.5 * s2.arg());
    let signed: Vec<f64> = c.iter().map(|z| (z * rot).re).collect();
    let mean = signed.iter().sum::<f64>() / signed.len() as f64;
    let times: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let spectrum = |w: f64| -> f64 {
        times
            .iter()
            .zip(&signed)
            .map(|(&t, &v)| Complex64::from_polar(v - mean, -w * t))
            .sum::<Complex64>()
            .norm_sqr()
    };
    let (lo, hi, m) = (0.25 * omega_m, 1.5 * omega_m, 2000);
    let h = (hi - lo) / m as f64;
    let vals: Vec<f64> = (0..=m).map(|i| spectrum(lo + i as f64 * h)).collect();
    let imax = (0..=m).max_by(|&a, &b| vals[a].total_cmp(&vals[b])).expect("non-empty");
    let mut w = lo + imax as f64 * h;
    if imax > 0 && imax < m {
        let (a, b, cc) = (vals[imax - 1], vals[imax], vals[imax + 1]);
        let den = a - 2.0 * b + cc;
        if den < 0.0 {
            w += 0.5 * (a - cc) / den * h;
        }
    }
    let partner = |i: usize, shift: f64| {
        let target = times[i] + shift;
        (i..times.len()).find(|&j| (times[j] - target).abs() < 1e-3 * stride)
    };
    let anchors: Vec<usize> = (0..times.len()).filter(|&i| partner(i, period).is_some()).collect();
    let with_two: Vec<usize> = anchors.iter().cloned().filter(|&i| partner(i, 2.0 * period).is_some()).collect();
    let pick = |set: &[usize]| set.iter().cloned().max_by(|&a, &b| c[a].norm().total_cmp(&c[b].norm()));
    let corr = |i: Option<usize>, shift: f64| {
        i.and_then(|i| partner(i, shift).map(|j| correlation(&samples[i].1, &samples[j].1)))
    };
    let anchor = pick(&with_two).or_else(|| pick(&anchors));
    Ok(SubharmonicReport {
        ratio: omega_m / w,
        response_omega: w,
        correlation_one_period: corr(anchor, period),
        correlation_two_periods: corr(anchor, 2.0 * period),
        confidence,
    })
}
