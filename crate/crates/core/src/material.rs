//! Dispersive permittivity of the wire metal.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A frequency argument on the real axis or on the positive imaginary axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SpectralPoint {
    /// Real angular frequency ω.
    Real(f64),
    /// Imaginary frequency iκ, holding κ.
    Imaginary(f64),
}

impl SpectralPoint {
    /// The complex frequency `s` (ω or iκ).
    pub fn value(self) -> Complex64 {
        match self {
            SpectralPoint::Real(w) => Complex64::new(w, 0.0),
            SpectralPoint::Imaginary(k) => Complex64::new(0.0, k),
        }
    }

    pub fn modulus(self) -> f64 {
        match self {
            SpectralPoint::Real(w) => w.abs(),
            SpectralPoint::Imaginary(k) => k.abs(),
        }
    }

    pub fn is_imaginary(self) -> bool {
        matches!(self, SpectralPoint::Imaginary(_))
    }
}

/// Anything that can report a relative permittivity at a complex frequency
/// in the closed upper half-plane.
pub trait Dielectric {
    fn permittivity_at(&self, s: Complex64) -> Result<Complex64>;
}

/// Drude metal, `ε(ω) = eps_inf − ω_p²/(ω² + iγ_pω)`.
///
/// Frequencies are in natural units (c = 1, lengths in λ0, so ω_A = 2π).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DrudeModel {
    pub eps_inf: f64,
    pub omega_p: f64,
    pub gamma_p: f64,
}

/// Below this |s| the Drude pole makes ε meaningless.
const ZERO_FREQUENCY_GUARD: f64 = 1e-12;

impl DrudeModel {
    pub fn new(eps_inf: f64, omega_p: f64, gamma_p: f64) -> Result<Self> {
        if !(eps_inf >= 1.0) || !eps_inf.is_finite() {
            return Err(Error::Config(format!("eps_inf must be >= 1, got {eps_inf}")));
        }
        if !(omega_p > 0.0) || !omega_p.is_finite() {
            return Err(Error::Config(format!("omega_p must be > 0, got {omega_p}")));
        }
        if !(gamma_p >= 0.0) || !gamma_p.is_finite() {
            return Err(Error::Config(format!("gamma_p must be >= 0, got {gamma_p}")));
        }
        Ok(Self { eps_inf, omega_p, gamma_p })
    }

    /// Silver-like defaults: ω_p = 4ω_A, γ_p = 0.01ω_p, for a given ω_A.
    pub fn default_for(omega_a: f64) -> Self {
        let omega_p = 4.0 * omega_a;
        Self { eps_inf: 1.0, omega_p, gamma_p: 0.01 * omega_p }
    }

    pub fn permittivity(&self, s: SpectralPoint) -> Result<Complex64> {
        match s {
            SpectralPoint::Imaginary(k) => {
                if !(k.abs() >= ZERO_FREQUENCY_GUARD) {
                    return Err(Error::Domain(format!("permittivity at s = {k}i")));
                }
                // Exactly real on the imaginary axis.
                let w2 = self.omega_p * self.omega_p;
                Ok(Complex64::new(self.eps_inf + w2 / (k * (k + self.gamma_p)), 0.0))
            }
            SpectralPoint::Real(_) => self.permittivity_at(s.value()),
        }
    }
}

impl Dielectric for DrudeModel {
    fn permittivity_at(&self, s: Complex64) -> Result<Complex64> {
        if !(s.norm() >= ZERO_FREQUENCY_GUARD) {
            return Err(Error::Domain(format!("permittivity at s = {s}")));
        }
        let denom = s * s + Complex64::new(0.0, self.gamma_p) * s;
        Ok(self.eps_inf - self.omega_p * self.omega_p / denom)
    }
}
