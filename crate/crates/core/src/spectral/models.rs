//! Closed-form causal response functions for validating the quadratures.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::material::SpectralPoint;

use super::{imag_axis_integrate, pv_shift_oracle_with, Feature, PvOptions};

/// `L(s) = 1/(ω0² − s² − iγs)`: analytic in the upper half-plane and real on
/// the imaginary axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lorentz {
    pub omega0: f64,
    pub gamma: f64,
}

impl Lorentz {
    pub fn eval(&self, s: Complex64) -> Complex64 {
        let i = Complex64::new(0.0, 1.0);
        1.0 / (self.omega0 * self.omega0 - s * s - i * self.gamma * s)
    }

    pub fn at(&self, p: SpectralPoint) -> Complex64 {
        match p {
            SpectralPoint::Imaginary(k) => {
                Complex64::new(1.0 / (self.omega0 * self.omega0 + k * k + self.gamma * k), 0.0)
            }
            SpectralPoint::Real(_) => self.eval(p.value()),
        }
    }
}

/// `G(s) = Σ_j f_j L_j(s) · Ω² L_uv(s)`.
///
/// The ultraviolet factor makes `s²G(s) → 0` at large |s|, which the
/// contour rotation needs; without it a bare sum of Lorentzians leaves a
/// finite arc contribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CausalModel {
    pub resonances: Vec<(f64, Lorentz)>,
    pub cutoff: Lorentz,
}

impl CausalModel {
    pub fn eval(&self, s: Complex64) -> Complex64 {
        let sum: Complex64 = self.resonances.iter().map(|(f, l)| *f * l.eval(s)).sum();
        sum * self.cutoff.omega0 * self.cutoff.omega0 * self.cutoff.eval(s)
    }

    pub fn at(&self, p: SpectralPoint) -> Complex64 {
        match p {
            SpectralPoint::Imaginary(_) => {
                let sum: f64 = self.resonances.iter().map(|(f, l)| *f * l.at(p).re).sum();
                let w2 = self.cutoff.omega0 * self.cutoff.omega0;
                Complex64::new(sum * w2 * self.cutoff.at(p).re, 0.0)
            }
            SpectralPoint::Real(_) => self.eval(p.value()),
        }
    }

    /// Resonance locations, for meshing real-axis integrals.
    pub fn features(&self) -> Vec<Feature> {
        self.resonances
            .iter()
            .chain(std::iter::once(&(1.0, self.cutoff)))
            .map(|(_, l)| Feature { center: l.omega0, width: l.gamma.max(1e-12) })
            .collect()
    }

    /// Models with one, two and three resonances around `omega_a`.
    pub fn suite(omega_a: f64) -> Vec<CausalModel> {
        let w = omega_a;
        let cutoff = Lorentz { omega0: 8.0 * w, gamma: 3.0 * w };
        let lor = |f: f64, c: f64, g: f64| (f, Lorentz { omega0: c * w, gamma: g * w });
        vec![
            CausalModel { resonances: vec![lor(1.0, 1.3, 0.1)], cutoff },
            CausalModel { resonances: vec![lor(1.0, 0.7, 0.05), lor(-0.6, 1.8, 0.3)], cutoff },
            CausalModel {
                resonances: vec![lor(0.8, 0.4, 0.2), lor(1.5, 1.05, 0.02), lor(0.5, 3.0, 0.5)],
                cutoff,
            },
        ]
    }
}

/// The two terms of the contour-rotated shift integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftTerms {
    /// `π ω_A² Re G(ω_A)`.
    pub resonant: f64,
    /// `∫₀^∞ κ² Re G(iκ) ω_A/(κ²+ω_A²) dκ`.
    pub integral: f64,
}

impl ShiftTerms {
    pub fn total(&self) -> f64 {
        self.resonant + self.integral
    }
}

/// Contour-rotated evaluation of `PV ∫₀^∞ ω² Im G(ω)/(ω − ω_A) dω`.
pub fn contour_shift<G>(g: G, omega_a: f64, tol: f64) -> Result<ShiftTerms>
where
    G: Fn(SpectralPoint) -> Complex64 + Sync,
{
    let resonant = std::f64::consts::PI * omega_a * omega_a * g(SpectralPoint::Real(omega_a)).re;
    let r = imag_axis_integrate(|k| g(SpectralPoint::Imaginary(k)).re, omega_a, tol)?;
    if !r.converged {
        return Err(crate::error::Error::Quadrature {
            nodes: r.nodes_used,
            error: r.abs_error_estimate,
            target: tol * r.value.norm(),
        });
    }
    Ok(ShiftTerms { resonant, integral: r.value.re })
}

/// Real-axis principal value of the same quantity for a model.
pub fn model_pv_shift(model: &CausalModel, omega_a: f64, tol: f64) -> Result<f64> {
    let opts = PvOptions { features: model.features(), ..PvOptions::new(tol) };
    Ok(pv_shift_oracle_with(|w| Ok(model.eval(Complex64::new(w, 0.0)).im), omega_a, &opts)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reflection_symmetry() {
        let m = &CausalModel::suite(1.0)[2];
        let s = Complex64::new(0.9, 0.3);
        let lhs = m.eval(-s.conj());
        assert!((lhs - m.eval(s).conj()).norm() < 1e-15 * lhs.norm());
    }

    #[test]
    fn imaginary_axis_matches_complex_evaluation() {
        let m = &CausalModel::suite(2.0)[1];
        let direct = m.eval(Complex64::new(0.0, 1.7));
        let fast = m.at(SpectralPoint::Imaginary(1.7));
        assert!((direct - fast).norm() < 1e-14 * fast.norm());
        assert!(direct.im.abs() < 1e-14 * direct.norm());
    }
}
