//! The two-component order parameter and its derived densities.

use num_complex::Complex64;

use crate::error::{GpfError, Result};
use crate::grid::Grid;

/// ψ₁ and ψ₂ sampled on a shared grid, together with the simulation time.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryField {
    pub grid: Grid,
    pub psi: [Vec<Complex64>; 2],
    /// Time in ms.
    pub time: f64,
}

impl BinaryField {
    pub fn zeros(grid: Grid) -> Self {
        let n = grid.len();
        BinaryField {
            grid,
            psi: [vec![Complex64::new(0.0, 0.0); n], vec![Complex64::new(0.0, 0.0); n]],
            time: 0.0,
        }
    }

    pub fn from_components(grid: Grid, psi1: Vec<Complex64>, psi2: Vec<Complex64>) -> Result<Self> {
        if psi1.len() != grid.len() || psi2.len() != grid.len() {
            return Err(GpfError::Config(format!(
                "component lengths {} / {} do not match grid size {}",
                psi1.len(),
                psi2.len(),
                grid.len()
            )));
        }
        Ok(BinaryField {
            grid,
            psi: [psi1, psi2],
            time: 0.0,
        })
    }

    /// ∫|ψ_j|² for component j ∈ {0, 1}.
    pub fn norm(&self, j: usize) -> f64 {
        self.psi[j].iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.cell_volume()
    }

    pub fn norms(&self) -> [f64; 2] {
        [self.norm(0), self.norm(1)]
    }

    /// Rescale component j so that its norm equals `target`.
    pub fn renormalize_component(&mut self, j: usize, target: f64) {
        let n = self.norm(j);
        if n > 0.0 {
            let s = (target / n).sqrt();
            for z in self.psi[j].iter_mut() {
                *z *= s;
            }
        }
    }

    pub fn renormalize(&mut self, target_per_component: f64) {
        self.renormalize_component(0, target_per_component);
        self.renormalize_component(1, target_per_component);
    }

    pub fn density(&self, j: usize) -> Vec<f64> {
        self.psi[j].iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.psi
            .iter()
            .all(|c| c.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
    }

    /// Total density at the grid point nearest the origin.
    pub fn central_density(&self) -> f64 {
        let c = self.grid.center_index();
        self.psi[0][c].norm_sqr() + self.psi[1][c].norm_sqr()
    }

    /// Largest pointwise relative difference |a−b| / max|a| over both
    /// components. Used for reversibility and convergence checks.
    pub fn max_relative_difference(&self, other: &BinaryField) -> f64 {
        let mut num: f64 = 0.0;
        let mut den: f64 = 0.0;
        for j in 0..2 {
            for (a, b) in self.psi[j].iter().zip(&other.psi[j]) {
                num = num.max((a - b).norm());
                den = den.max(a.norm());
            }
        }
        if den == 0.0 {
            num
        } else {
            num / den
        }
    }

    /// L²-relative difference ‖a−b‖ / ‖a‖ over both components.
    pub fn l2_relative_difference(&self, other: &BinaryField) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for j in 0..2 {
            for (a, b) in self.psi[j].iter().zip(&other.psi[j]) {
                num += (a - b).norm_sqr();
                den += a.norm_sqr();
            }
        }
        (num / den).sqrt()
    }
}

/// n = n₁ + n₂, n_s = n₁ − n₂ and the local magnetization n_s/n.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedDensities {
    pub total: Vec<f64>,
    pub spin: Vec<f64>,
    /// n_s/n where n exceeds the cutoff, 0 elsewhere.
    pub magnetization: Vec<f64>,
}

/// Densities below this fraction of the peak total density carry no
/// magnetization.
pub const MAGNETIZATION_CUTOFF: f64 = 1e-8;

pub fn densities(field: &BinaryField) -> DerivedDensities {
    let n1 = field.density(0);
    let n2 = field.density(1);
    let total: Vec<f64> = n1.iter().zip(&n2).map(|(a, b)| a + b).collect();
    let spin: Vec<f64> = n1.iter().zip(&n2).map(|(a, b)| a - b).collect();
    let peak = total.iter().cloned().fold(0.0, f64::max);
    let eps = MAGNETIZATION_CUTOFF * peak;
    let magnetization = total
        .iter()
        .zip(&spin)
        .map(|(&n, &s)| if n > eps { s / n } else { 0.0 })
        .collect();
    DerivedDensities {
        total,
        spin,
        magnetization,
    }
}
