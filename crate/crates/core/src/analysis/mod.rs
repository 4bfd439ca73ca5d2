//! Faraday-pattern observables extracted from field snapshots.

mod growth;
mod polar;
mod profile;
mod spectrum;

pub use growth::{growth_report, subharmonic_check, GrowthOptions, GrowthReport, SubharmonicReport};
pub use polar::{
    bessel_decompose, column_density_2d, label_mode, spin_column_2d, BesselDecomposition, BesselOptions,
    ModeLabel, PlanarField, PolarField,
};
pub use profile::{integrate_profile, Profile1D, ProfileKind};
pub use spectrum::{band_power, fourier_1d, power_spectrum_1d, side_peaks, Fourier1D, PeakResult, SidePeak};
