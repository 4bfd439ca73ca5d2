//! Periodic Cartesian grids.

use serde::{Deserialize, Serialize};

use crate::error::{GpfError, Result};

/// A periodic box `[-L_i, L_i)` per axis, axis order (x, y, z), stored
/// row-major with the last axis contiguous.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    points: Vec<usize>,
    half_widths: Vec<f64>,
}

impl Grid {
    pub fn new(points: &[usize], half_widths: &[f64]) -> Result<Self> {
        if points.is_empty() || points.len() > 3 {
            return Err(GpfError::Config(format!(
                "grid must have 1 to 3 axes, got {}",
                points.len()
            )));
        }
        if points.len() != half_widths.len() {
            return Err(GpfError::Config(
                "grid points and extents have different lengths".into(),
            ));
        }
        for &n in points {
            if n < 2 || !n.is_power_of_two() {
                return Err(GpfError::Config(format!(
                    "grid sizes must be powers of two, got {n}"
                )));
            }
        }
        for &l in half_widths {
            if !(l.is_finite() && l > 0.0) {
                return Err(GpfError::Config(format!("grid half-width must be positive, got {l}")));
            }
        }
        Ok(Grid {
            points: points.to_vec(),
            half_widths: half_widths.to_vec(),
        })
    }

    /// Shorthand for a grid with the same size and extent on every axis.
    pub fn cube(dims: usize, n: usize, half_width: f64) -> Result<Self> {
        Grid::new(&vec![n; dims], &vec![half_width; dims])
    }

    pub fn dims(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn half_widths(&self) -> &[f64] {
        &self.half_widths
    }

    pub fn len(&self) -> usize {
        self.points.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        2.0 * self.half_widths[axis] / self.points[axis] as f64
    }

    pub fn spacings(&self) -> Vec<f64> {
        (0..self.dims()).map(|a| self.spacing(a)).collect()
    }

    /// Σ_i (π/dx_i)², the squared Nyquist wavenumber of the grid.
    pub fn k_max_sq(&self) -> f64 {
        (0..self.dims()).map(|a| (std::f64::consts::PI / self.spacing(a)).powi(2)).sum()
    }

    /// Volume element Π dx_i.
    pub fn cell_volume(&self) -> f64 {
        (0..self.dims()).map(|a| self.spacing(a)).product()
    }

    /// Coordinates along one axis; index n/2 sits at the origin.
    pub fn axis(&self, axis: usize) -> Vec<f64> {
        let n = self.points[axis];
        let dx = self.spacing(axis);
        let l = self.half_widths[axis];
        (0..n).map(|i| -l + i as f64 * dx).collect()
    }

    /// Angular wavenumbers in standard FFT order.
    pub fn wavenumbers(&self, axis: usize) -> Vec<f64> {
        let n = self.points[axis];
        let dk = 2.0 * std::f64::consts::PI / (n as f64 * self.spacing(axis));
        (0..n)
            .map(|i| {
                let m = if i < n / 2 { i as isize } else { i as isize - n as isize };
                m as f64 * dk
            })
            .collect()
    }

    /// Row-major strides.
    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.dims()];
        for a in (0..self.dims().saturating_sub(1)).rev() {
            s[a] = s[a + 1] * self.points[a + 1];
        }
        s
    }

    /// Linear index of the grid point closest to the origin.
    pub fn center_index(&self) -> usize {
        self.strides()
            .iter()
            .zip(&self.points)
            .map(|(s, n)| s * (n / 2))
            .sum()
    }

    /// Fill `out[i]` with f(coordinates of point i).
    pub fn map_points<F: FnMut(&[f64]) -> f64>(&self, mut f: F) -> Vec<f64> {
        let axes: Vec<Vec<f64>> = (0..self.dims()).map(|a| self.axis(a)).collect();
        let mut out = Vec::with_capacity(self.len());
        let mut idx = vec![0usize; self.dims()];
        let mut coord = vec![0.0; self.dims()];
        for _ in 0..self.len() {
            for a in 0..self.dims() {
                coord[a] = axes[a][idx[a]];
            }
            out.push(f(&coord));
            for a in (0..self.dims()).rev() {
                idx[a] += 1;
                if idx[a] < self.points[a] {
                    break;
                }
                idx[a] = 0;
            }
        }
        out
    }

    /// Σ_a coef[a]·x_a² at every grid point.
    pub fn quadratic_form(&self, coef: &[f64]) -> Vec<f64> {
        self.map_points(|x| x.iter().zip(coef).map(|(xi, c)| c * xi * xi).sum())
    }

    /// |k|² at each point of the reciprocal grid.
    pub fn k_squared(&self) -> Vec<f64> {
        let ks: Vec<Vec<f64>> = (0..self.dims()).map(|a| self.wavenumbers(a)).collect();
        let mut out = Vec::with_capacity(self.len());
        let mut idx = vec![0usize; self.dims()];
        for _ in 0..self.len() {
            out.push((0..self.dims()).map(|a| ks[a][idx[a]].powi(2)).sum());
            for a in (0..self.dims()).rev() {
                idx[a] += 1;
                if idx[a] < self.points[a] {
                    break;
                }
                idx[a] = 0;
            }
        }
        out
    }
}
