//! Multi-dimensional complex FFTs on row-major grids.
//!
//! The forward transform is unnormalized; the inverse divides by the total
//! number of points so that `inverse(forward(x)) == x`.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::grid::Grid;

pub struct SpectralPlan {
    points: Vec<usize>,
    strides: Vec<usize>,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
    scratch: Vec<Complex64>,
    lines: Vec<Complex64>,
}

impl std::fmt::Debug for SpectralPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralPlan").field("points", &self.points).finish()
    }
}

impl SpectralPlan {
    pub fn new(grid: &Grid) -> Self {
        let mut planner = FftPlanner::new();
        let points = grid.points().to_vec();
        let forward: Vec<_> = points.iter().map(|&n| planner.plan_fft_forward(n)).collect();
        let inverse: Vec<_> = points.iter().map(|&n| planner.plan_fft_inverse(n)).collect();
        let scratch_len = forward
            .iter()
            .chain(&inverse)
            .map(|p| p.get_inplace_scratch_len())
            .max()
            .unwrap_or(0);
        SpectralPlan {
            strides: grid.strides(),
            points,
            forward,
            inverse,
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
            lines: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn len(&self) -> usize {
        self.points.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn forward(&mut self, data: &mut [Complex64]) {
        self.transform(data, true);
    }

    pub fn inverse(&mut self, data: &mut [Complex64]) {
        self.transform(data, false);
        let s = 1.0 / self.len() as f64;
        for z in data.iter_mut() {
            *z *= s;
        }
    }

    fn transform(&mut self, data: &mut [Complex64], forward: bool) {
        assert_eq!(data.len(), self.len(), "buffer does not match plan size");
        let dims = self.points.len();
        for axis in 0..dims {
            let plan = if forward {
                self.forward[axis].clone()
            } else {
                self.inverse[axis].clone()
            };
            let n = self.points[axis];
            if axis == dims - 1 {
                // contiguous lines: one batched call
                plan.process_with_scratch(data, &mut self.scratch);
                continue;
            }
            let stride = self.strides[axis];
            let outer = data.len() / (n * stride);
            // gather every line along `axis` into a contiguous buffer
            let mut line = 0;
            for o in 0..outer {
                let base = o * n * stride;
                for inner in 0..stride {
                    let start = line * n;
                    for i in 0..n {
                        self.lines[start + i] = data[base + i * stride + inner];
                    }
                    line += 1;
                }
            }
            plan.process_with_scratch(&mut self.lines, &mut self.scratch);
            let mut line = 0;
            for o in 0..outer {
                let base = o * n * stride;
                for inner in 0..stride {
                    let start = line * n;
                    for i in 0..n {
                        data[base + i * stride + inner] = self.lines[start + i];
                    }
                    line += 1;
                }
            }
        }
    }
}
