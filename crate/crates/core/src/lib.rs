//! Collective decay rates and medium-induced level shifts for two-level
//! emitters coupled through the surface-plasmon modes of a metallic nanowire.
//!
//! Natural units throughout: c = 1, lengths in units of the vacuum transition
//! wavelength λ0, so the transition frequency is ω_A = 2π.

pub mod config;
pub mod emitters;
pub mod error;
pub mod gvac;
pub mod gwire;
pub mod material;
pub mod spectral;
pub mod specfun;
pub mod sweep;
pub mod validate;

pub use emitters::{
    EmitterPair, LorentzianFit, RateShiftEngine, RateShiftResult, SweepOptions, WireSystem,
};
pub use config::{Format, RunConfig};
pub use error::{Error, Result};
pub use gvac::{CylPoint, DyadicGreen, Frame, Tensor3};
pub use gwire::WireGeometry;
pub use material::{DrudeModel, SpectralPoint};
pub use spectral::QuadratureReport;
pub use sweep::{SweepRow, SweepTable};
pub use validate::{ValidateOptions, ValidationReport};
