use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::bessel::bessel_j_table;
use crate::error::{GpfError, Result};
use crate::field::{densities, BinaryField};

/// Values of a planar field on an (r, φ) lattice, r-major.
#[derive(Debug, Clone)]
pub struct PolarField {
    pub r: Vec<f64>,
    pub n_phi: usize,
    pub values: Vec<f64>,
}

/// A real field on a 2D periodic Cartesian grid.
#[derive(Debug, Clone)]
pub struct PlanarField {
    pub points: [usize; 2],
    pub half_widths: [f64; 2],
    pub values: Vec<f64>,
}

fn planar(field: &BinaryField, pointwise: Vec<f64>) -> Result<PlanarField> {
    let g = &field.grid;
    match g.dims() {
        2 => Ok(PlanarField {
            points: [g.points()[0], g.points()[1]],
            half_widths: [g.half_widths()[0], g.half_widths()[1]],
            values: pointwise,
        }),
        3 => {
            let nz = g.points()[2];
            let dz = g.spacing(2);
            let values = pointwise.chunks(nz).map(|c| c.iter().sum::<f64>() * dz).collect();
            Ok(PlanarField {
                points: [g.points()[0], g.points()[1]],
                half_widths: [g.half_widths()[0], g.half_widths()[1]],
                values,
            })
        }
        d => Err(GpfError::Analysis(format!("planar analysis needs a 2D or 3D field, got {d}D"))),
    }
}

/// n_s,2D: the spin density, integrated over z for 3D fields.
pub fn spin_column_2d(field: &BinaryField) -> Result<PlanarField> {
    planar(field, densities(field).spin)
}

/// Total column density n₂D.
pub fn column_density_2d(field: &BinaryField) -> Result<PlanarField> {
    planar(field, densities(field).total)
}

impl PlanarField {
    pub fn spacing(&self, axis: usize) -> f64 {
        2.0 * self.half_widths[axis] / self.points[axis] as f64
    }

    /// Periodic bilinear interpolation at (x, y).
    pub fn sample(&self, x: f64, y: f64) -> f64 {
        let [nx, ny] = self.points;
        let fx = (x + self.half_widths[0]) / self.spacing(0);
        let fy = (y + self.half_widths[1]) / self.spacing(1);
        let (ix, iy) = (fx.floor(), fy.floor());
        let (tx, ty) = (fx - ix, fy - iy);
        let wrap = |i: f64, n: usize| (i as i64).rem_euclid(n as i64) as usize;
        let (i0, j0) = (wrap(ix, nx), wrap(iy, ny));
        let (i1, j1) = ((i0 + 1) % nx, (j0 + 1) % ny);
        let v = |i: usize, j: usize| self.values[i * ny + j];
        (1.0 - tx) * ((1.0 - ty) * v(i0, j0) + ty * v(i0, j1)) + tx * ((1.0 - ty) * v(i1, j0) + ty * v(i1, j1))
    }

    /// Resample on r_j = j·R/n_r (j = 0..=n_r) and φ_m = 2πm/n_phi, with R
    /// the inscribed box radius.
    pub fn to_polar(&self, n_r: usize, n_phi: usize) -> PolarField {
        let radius = self.half_widths[0].min(self.half_widths[1]);
        let r: Vec<f64> = (0..=n_r).map(|j| j as f64 * radius / n_r as f64).collect();
        let mut values = Vec::with_capacity(r.len() * n_phi);
        for &rj in &r {
            for m in 0..n_phi {
                let phi = 2.0 * std::f64::consts::PI * m as f64 / n_phi as f64;
                values.push(self.sample(rj * phi.cos(), rj * phi.sin()));
            }
        }
        PolarField { r, n_phi, values }
    }
}

impl PolarField {
    /// A_m(r) = ∫dφ f(r, φ) e^{−imφ} for every discrete m (FFT order).
    pub fn angular_harmonics(&self) -> Vec<Vec<Complex64>> {
        let fft = FftPlanner::new().plan_fft_forward(self.n_phi);
        let w = 2.0 * std::f64::consts::PI / self.n_phi as f64;
        self.values
            .chunks(self.n_phi)
            .map(|ring| {
                let mut buf: Vec<Complex64> = ring.iter().map(|&v| Complex64::new(v * w, 0.0)).collect();
                fft.process(&mut buf);
                buf
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BesselOptions {
    pub l_max: usize,
    pub k_max: f64,
    pub n_k: usize,
    pub n_phi: usize,
    /// Radial samples; `None` uses half the x points.
    pub n_r: Option<usize>,
}

impl Default for BesselOptions {
    fn default() -> Self {
        BesselOptions {
            l_max: 10,
            k_max: 1.5,
            n_k: 150,
            n_phi: 256,
            n_r: None,
        }
    }
}

/// P_l(k_r) = √(k_r/2π) ∫dφ∫dr r f J_l(k_r r) e^{−ilφ} on an (l, k_r) lattice.
#[derive(Debug, Clone)]
pub struct BesselDecomposition {
    pub l_max: usize,
    /// k_r = (i+1)·k_max/n_k.
    pub k: Vec<f64>,
    /// `p[l][i]`.
    pub p: Vec<Vec<Complex64>>,
    pub r: Vec<f64>,
    /// Angular transform A_l(r), `angular[l][j]`.
    pub angular: Vec<Vec<Complex64>>,
}

impl BesselDecomposition {
    pub fn dk(&self) -> f64 {
        self.k[0]
    }

    /// ∫dk_r |P_l|².
    pub fn l_power(&self, l: usize) -> f64 {
        self.p[l].iter().map(|z| z.norm_sqr()).sum::<f64>() * self.dk()
    }

    /// Σ_l |P_l(k_r)|² at every k_r.
    pub fn k_power(&self) -> Vec<f64> {
        (0..self.k.len())
            .map(|i| self.p.iter().map(|row| row[i].norm_sqr()).sum())
            .collect()
    }

    pub fn total_power(&self) -> f64 {
        (0..=self.l_max).map(|l| self.l_power(l)).sum()
    }

    /// k_r of the largest |P_l|.
    pub fn peak_k(&self, l: usize) -> f64 {
        let (i, _) = self.p[l]
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
            .expect("non-empty k grid");
        self.k[i]
    }

    pub fn dominant_l(&self) -> usize {
        (0..=self.l_max)
            .max_by(|&a, &b| self.l_power(a).total_cmp(&self.l_power(b)))
            .unwrap_or(0)
    }
}

pub fn bessel_decompose(input: &PlanarField, opts: &BesselOptions) -> Result<BesselDecomposition> {
    if opts.n_phi < 2 * opts.l_max + 2 {
        return Err(GpfError::Analysis(format!(
            "{} angular samples cannot resolve l = {}",
            opts.n_phi, opts.l_max
        )));
    }
    if opts.n_k == 0 || !(opts.k_max > 0.0) {
        return Err(GpfError::Analysis("empty k_r grid".into()));
    }
    let n_r = opts.n_r.unwrap_or(input.points[0] / 2).max(2);
    let polar = input.to_polar(n_r, opts.n_phi);
    let harmonics = polar.angular_harmonics();
    let angular: Vec<Vec<Complex64>> = (0..=opts.l_max)
        .map(|l| harmonics.iter().map(|ring| ring[l]).collect())
        .collect();
    let r = polar.r;
    let dr = r[1] - r[0];
    let weights: Vec<f64> = (0..r.len())
        .map(|j| if j == 0 || j + 1 == r.len() { 0.5 * dr } else { dr } * r[j])
        .collect();
    let dk = opts.k_max / opts.n_k as f64;
    let k: Vec<f64> = (1..=opts.n_k).map(|i| i as f64 * dk).collect();
    let mut p = vec![vec![Complex64::new(0.0, 0.0); k.len()]; opts.l_max + 1];
    for (i, &kr) in k.iter().enumerate() {
        let pref = (kr / (2.0 * std::f64::consts::PI)).sqrt();
        for (j, &rj) in r.iter().enumerate() {
            let jl = bessel_j_table(opts.l_max, kr * rj);
            for l in 0..=opts.l_max {
                p[l][i] += angular[l][j] * (weights[j] * jl[l]);
            }
        }
        for row in p.iter_mut() {
            row[i] *= pref;
        }
    }
    let out = BesselDecomposition {
        l_max: opts.l_max,
        k,
        p,
        r,
        angular,
    };
    if out.total_power() > 0.0 && out.dominant_l() == opts.l_max {
        log::warn!("dominant angular number sits at l_max = {}; raise l_max", opts.l_max);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeLabel {
    pub l: usize,
    pub n_r: usize,
    /// Fraction of the decomposed power in the dominant l.
    pub confidence: f64,
    pub low_confidence: bool,
    /// k_r of the largest |P_l| at the dominant l.
    pub k_peak: f64,
}

/// Radial samples below this fraction of the profile maximum are skipped
/// when counting sign changes.
const NODE_THRESHOLD: f64 = 0.05;

/// (l, n_r) of the dominant pattern. Nodes are counted inside `tf_radius`.
pub fn label_mode(decomp: &BesselDecomposition, tf_radius: f64) -> ModeLabel {
    let total = decomp.total_power();
    let l = decomp.dominant_l();
    let confidence = if total > 0.0 { decomp.l_power(l) / total } else { 0.0 };
    let a = &decomp.angular[l];
    let inside: Vec<usize> = (0..decomp.r.len()).filter(|&j| decomp.r[j] < tf_radius).collect();
    // Rotate A_l to the phase that maximizes its real part in the L² sense.
    let s: Complex64 = inside.iter().map(|&j| a[j] * a[j] * decomp.r[j]).sum();
    let rot = Complex64::from_polar(1.0, -0.5 * s.arg());
    let profile: Vec<f64> = inside.iter().map(|&j| (a[j] * rot).re).collect();
    let peak = profile.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut n_r = 0;
    let mut last = 0.0f64;
    for &v in &profile {
        if v.abs() <= NODE_THRESHOLD * peak {
            continue;
        }
        if last != 0.0 && v.signum() != last.signum() {
            n_r += 1;
        }
        last = v;
    }
    ModeLabel {
        l,
        n_r,
        confidence,
        low_confidence: confidence < 0.5,
        k_peak: decomp.peak_k(l),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bessel::bessel_j;
    use proptest::prelude::*;

    fn synthetic(n: usize, half: f64, f: impl Fn(f64, f64) -> f64) -> PlanarField {
        let dx = 2.0 * half / n as f64;
        let mut values = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                values.push(f(-half + i as f64 * dx, -half + j as f64 * dx));
            }
        }
        PlanarField {
            points: [n, n],
            half_widths: [half, half],
            values,
        }
    }

    fn bessel_pattern(l: usize, k0: f64, rtf: f64, rot: f64) -> PlanarField {
        synthetic(128, 32.0, |x, y| {
            let r = x.hypot(y);
            if r > rtf {
                0.0
            } else {
                bessel_j(l, k0 * r) * (l as f64 * (y.atan2(x) - rot)).cos()
            }
        })
    }

    #[test]
    fn truncated_bessel_mode_is_recovered() {
        // J₃ zeros: 6.380, 9.761, 13.015; k₀R = 11.5 leaves two interior nodes.
        let rtf = 22.0;
        let k0 = 11.5 / rtf;
        let d = bessel_decompose(&bessel_pattern(3, k0, rtf, 0.0), &BesselOptions::default()).unwrap();
        let frac = d.l_power(3) / d.total_power();
        assert!(frac > 0.95, "l=3 fraction {frac}");
        assert!((d.peak_k(3) - k0).abs() < 0.05);
        let label = label_mode(&d, rtf);
        assert_eq!((label.l, label.n_r), (3, 2));
        assert!(!label.low_confidence);
    }

    #[test]
    fn axisymmetric_input_has_only_l0() {
        let f = synthetic(64, 16.0, |x, y| (-(x * x + y * y) / 20.0).exp());
        let d = bessel_decompose(&f, &BesselOptions::default()).unwrap();
        for l in 1..=10 {
            assert!(d.l_power(l) < 1e-6 * d.l_power(0), "l = {l}");
        }
    }

    #[test]
    fn too_few_angles_is_an_error() {
        let f = synthetic(16, 4.0, |_, _| 1.0);
        let opts = BesselOptions {
            n_phi: 8,
            ..Default::default()
        };
        assert!(bessel_decompose(&f, &opts).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn decomposition_is_linear(a in -2.0f64..2.0, b in -2.0f64..2.0, s in 0.0f64..1.0) {
            let f = bessel_pattern(2, 0.4, 20.0, s);
            let g = synthetic(128, 32.0, |x, y| (-(x - 3.0).powi(2) / 30.0 - y * y / 50.0).exp());
            let mut h = f.clone();
            for (v, (p, q)) in h.values.iter_mut().zip(f.values.iter().zip(&g.values)) {
                *v = a * p + b * q;
            }
            let opts = BesselOptions { l_max: 4, n_k: 30, ..Default::default() };
            let (df, dg, dh) = (
                bessel_decompose(&f, &opts).unwrap(),
                bessel_decompose(&g, &opts).unwrap(),
                bessel_decompose(&h, &opts).unwrap(),
            );
            let scale = dh.p.iter().flatten().map(|z| z.norm()).fold(1e-300, f64::max);
            for l in 0..=4 {
                for i in 0..30 {
                    let d = dh.p[l][i] - (df.p[l][i] * a + dg.p[l][i] * b);
                    prop_assert!(d.norm() <= 1e-8 * scale);
                }
            }
        }

        #[test]
        fn opposite_harmonics_carry_equal_power(s in 0.0f64..3.0) {
            let f = synthetic(64, 16.0, |x, y| (x * 0.3 + s).sin() * (-(y * y) / 40.0).exp() + 0.2 * y);
            let h = f.to_polar(32, 64).angular_harmonics();
            for ring in &h {
                for l in 1..32 {
                    prop_assert!((ring[l].norm() - ring[64 - l].norm()).abs() < 1e-10 * (1.0 + ring[l].norm()));
                }
            }
        }

        #[test]
        fn label_is_rotation_invariant(rot in 0.0..std::f64::consts::TAU) {
            let rtf = 22.0;
            let k0 = 11.5 / rtf;
            let opts = BesselOptions::default();
            let d = bessel_decompose(&bessel_pattern(3, k0, rtf, rot), &opts).unwrap();
            let label = label_mode(&d, rtf);
            prop_assert_eq!((label.l, label.n_r), (3, 2));
        }
    }
}
