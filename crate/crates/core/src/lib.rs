pub mod analysis;
pub mod bessel;
pub mod config;
pub mod error;
pub mod evolve;
pub mod experiment;
pub mod fft;
pub mod field;
pub mod grid;
pub mod ground;
pub mod io;
pub mod linear;
pub mod mathieu;
pub mod protocol;
pub mod series;
pub mod setup;
pub mod stepper;
pub mod units;

pub use error::{GpfError, Result};
