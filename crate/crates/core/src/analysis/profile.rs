use serde::{Deserialize, Serialize};

use crate::error::{GpfError, Result};
use crate::field::{densities, BinaryField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    /// n − n_ref integrated over the transverse axes.
    DeltaN,
    /// n₁ − n₂ integrated over the transverse axes.
    Spin,
}

/// A line density along x.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile1D {
    pub x: Vec<f64>,
    pub values: Vec<f64>,
    pub kind: ProfileKind,
}

impl Profile1D {
    pub fn dx(&self) -> f64 {
        self.x[1] - self.x[0]
    }

    /// Full periodic length of the axis.
    pub fn length(&self) -> f64 {
        self.dx() * self.x.len() as f64
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.dx()
    }
}

/// Sum of `values` over every axis except x, weighted by the transverse cell
/// area. On a periodic grid the trapezoid rule is this plain sum.
pub(crate) fn integrate_transverse(values: &[f64], points: &[usize], spacing: &[f64]) -> Vec<f64> {
    let nx = points[0];
    let rest = values.len() / nx;
    let area: f64 = spacing[1..].iter().product();
    (0..nx)
        .map(|i| values[i * rest..(i + 1) * rest].iter().sum::<f64>() * area)
        .collect()
}

/// Integrated line profile of `kind`. `reference` is the equilibrium total
/// density on the same grid and is required for [`ProfileKind::DeltaN`].
pub fn integrate_profile(field: &BinaryField, kind: ProfileKind, reference: Option<&[f64]>) -> Result<Profile1D> {
    let grid = &field.grid;
    let d = densities(field);
    let pointwise = match kind {
        ProfileKind::Spin => d.spin,
        ProfileKind::DeltaN => {
            let r = reference.ok_or_else(|| GpfError::Analysis("delta_n profile needs an equilibrium reference".into()))?;
            if r.len() != d.total.len() {
                return Err(GpfError::Analysis(format!(
                    "reference has {} points, field has {}",
                    r.len(),
                    d.total.len()
                )));
            }
            d.total.iter().zip(r).map(|(n, r)| n - r).collect()
        }
    };
    Ok(Profile1D {
        x: grid.axis(0),
        values: integrate_transverse(&pointwise, grid.points(), &grid.spacings()),
        kind,
    })
}
