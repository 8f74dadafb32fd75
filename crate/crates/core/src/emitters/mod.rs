//! Decay rates, level shifts and collective levels of two emitters near the
//! wire.
//!
//! Rates and shifts are dimensionless, in units of the free-space rate Γ0 of
//! one emitter:
//!
//! * `Γ_mn/Γ0 = (6π/ω_A) Im d_m·G(r_m, r_n, ω_A)·d_n`, full Green's tensor;
//! * `δω_mn/Γ0 = (3/ω_A³)[π ω_A² Re d_m·G^med(ω_A)·d_n
//!   + ∫₀^∞ κ² Re d_m·G^med(iκ)·d_n ω_A/(κ²+ω_A²) dκ]`, medium part only.
//!
//! The first bracketed term is reported as the resonant part, the second as
//! the integral part.

mod engine;
mod fit;

use serde::{Deserialize, Serialize};

pub use engine::{RateShiftEngine, SweepOptions};
pub use fit::{
    analytic_approximations, fit_plasmon_lorentzian, fit_two_lorentzian, plasmon_spectrum,
    plasmon_window,
    Approximations, LorentzianFit, TwoLorentzian,
};

use crate::error::{Error, Result};
use crate::gvac::CylPoint;
use crate::gwire::WireGeometry;

/// Two identical two-level emitters, dipoles in the local cylindrical frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmitterPair {
    pub position_1: CylPoint,
    pub position_2: CylPoint,
    pub dipole_1: [f64; 3],
    pub dipole_2: [f64; 3],
    pub omega_a: f64,
}

impl EmitterPair {
    pub fn new(
        position_1: CylPoint,
        position_2: CylPoint,
        dipole_1: [f64; 3],
        dipole_2: [f64; 3],
        omega_a: f64,
    ) -> Result<Self> {
        for d in [dipole_1, dipole_2] {
            let n = d.iter().map(|x| x * x).sum::<f64>().sqrt();
            if (n - 1.0).abs() > 1e-12 {
                return Err(Error::Domain(format!("dipole {d:?} is not a unit vector")));
            }
        }
        if !(omega_a > 0.0) {
            return Err(Error::Domain(format!("transition frequency must be positive, got {omega_a}")));
        }
        Ok(Self { position_1, position_2, dipole_1, dipole_2, omega_a })
    }

    /// Radial dipoles at the same distance `rho` and azimuth, `dz` apart,
    /// with `ω_A = 2π`.
    pub fn radial(rho: f64, dz: f64) -> Self {
        Self {
            position_1: CylPoint::new(rho, 0.0, 0.0),
            position_2: CylPoint::new(rho, 0.0, dz),
            dipole_1: [1.0, 0.0, 0.0],
            dipole_2: [1.0, 0.0, 0.0],
            omega_a: 2.0 * std::f64::consts::PI,
        }
    }

    /// Axial separation `z2 − z1`.
    pub fn separation(&self) -> f64 {
        self.position_2.z - self.position_1.z
    }

    /// Copy with the second emitter moved to `z1 + dz`.
    pub fn with_separation(&self, dz: f64) -> Self {
        let mut p = *self;
        p.position_2.z = self.position_1.z + dz;
        p
    }
}

/// Wire plus emitter pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WireSystem {
    pub geometry: WireGeometry,
    pub pair: EmitterPair,
}

impl WireSystem {
    pub fn validate(&self) -> Result<()> {
        let a = self.geometry.radius;
        for p in [self.pair.position_1, self.pair.position_2] {
            if !(p.rho > a) {
                return Err(Error::Domain(format!("emitter at ρ = {} is not outside the wire (a = {a})", p.rho)));
            }
        }
        Ok(())
    }
}

/// Rates and shifts of a pair, in units of Γ0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateShiftResult {
    /// Axial separation `z2 − z1`.
    pub dz: f64,
    pub gamma11: f64,
    pub gamma22: f64,
    pub gamma12: f64,
    pub shift11_resonant: f64,
    pub shift11_integral: f64,
    pub shift11_total: f64,
    pub shift12_resonant: f64,
    pub shift12_integral: f64,
    pub shift12_total: f64,
    pub rates_converged: bool,
    pub shifts_converged: bool,
}

/// The same quantities divided by Γ11.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverGamma11 {
    pub gamma12: f64,
    pub shift12_total: f64,
    pub shift12_resonant: f64,
    pub shift12_integral: f64,
    pub shift11_total: f64,
}

impl RateShiftResult {
    pub fn over_gamma11(&self) -> OverGamma11 {
        let g = self.gamma11;
        OverGamma11 {
            gamma12: self.gamma12 / g,
            shift12_total: self.shift12_total / g,
            shift12_resonant: self.shift12_resonant / g,
            shift12_integral: self.shift12_integral / g,
            shift11_total: self.shift11_total / g,
        }
    }

    /// Smaller eigenvalue of the decay matrix `[[Γ11, Γ12], [Γ12, Γ22]]`.
    pub fn decay_matrix_min_eigenvalue(&self) -> f64 {
        let mean = 0.5 * (self.gamma11 + self.gamma22);
        let half = 0.5 * (self.gamma11 - self.gamma22);
        mean - half.hypot(self.gamma12)
    }

    pub fn is_positive_semidefinite(&self) -> bool {
        self.decay_matrix_min_eigenvalue() >= -1e-10 * self.gamma11.max(self.gamma22)
    }
}

/// `(Γ11, Γ12)` in units of Γ0.
pub fn decay_rates(system: &WireSystem, opts: SweepOptions) -> Result<(f64, f64)> {
    let r = dipole_shift(system, opts)?;
    Ok((r.gamma11, r.gamma12))
}

/// Rates and decomposed shifts at the pair's own separation.
pub fn dipole_shift(system: &WireSystem, opts: SweepOptions) -> Result<RateShiftResult> {
    let dz = system.pair.separation();
    let base = WireSystem { pair: system.pair.with_separation(0.0), ..*system };
    let rows = RateShiftEngine::new(base, opts)?.evaluate(&[dz])?;
    Ok(rows[0])
}

/// Decay and shift of one Dicke state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DickeChannel {
    pub decay: f64,
    pub shift: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DickeLevels {
    pub symmetric: DickeChannel,
    pub antisymmetric: DickeChannel,
    /// `(Γ11 + Γ12)/(Γ11 − Γ12)`; infinite for a perfectly dark state.
    pub superradiance_factor: f64,
}

pub fn dicke_levels(result: &RateShiftResult) -> DickeLevels {
    let (g11, g12, s) = (result.gamma11, result.gamma12, result.shift12_total);
    let dark = g11 - g12;
    DickeLevels {
        symmetric: DickeChannel { decay: g11 + g12, shift: s },
        antisymmetric: DickeChannel { decay: dark, shift: -s },
        superradiance_factor: if dark < 1e-12 * g11 { f64::INFINITY } else { (g11 + g12) / dark },
    }
}

/// Comparison of the coupling strength with the retardation bandwidth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarkovDiagnostic {
    /// `c/Δz`.
    pub bandwidth: f64,
    /// `max(|Γ12|, |δω12|)`, in the same frequency units.
    pub coupling: f64,
    /// `coupling > 0.1·bandwidth`.
    pub warning: bool,
}

/// Flags couplings that are not small against `1/Δz`. `coupling` is in
/// frequency units (`c = 1`, lengths in λ0).
pub fn markov_check(coupling: f64, dz: f64) -> Result<MarkovDiagnostic> {
    if !(dz > 0.0) {
        return Err(Error::Domain(format!("separation must be positive, got {dz}")));
    }
    let bandwidth = 1.0 / dz;
    Ok(MarkovDiagnostic { bandwidth, coupling, warning: coupling > 0.1 * bandwidth })
}

/// [`markov_check`] for a result in Γ0 units, given `Γ0/ω_A`.
pub fn markov_diagnostic(
    result: &RateShiftResult,
    omega_a: f64,
    gamma0_over_omega_a: f64,
) -> Result<MarkovDiagnostic> {
    let gamma0 = gamma0_over_omega_a * omega_a;
    let coupling = result.gamma12.abs().max(result.shift12_total.abs()) * gamma0;
    markov_check(coupling, result.dz.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn result(g11: f64, g12: f64, s12: f64) -> RateShiftResult {
        RateShiftResult {
            dz: 1.0,
            gamma11: g11,
            gamma22: g11,
            gamma12: g12,
            shift11_resonant: 0.0,
            shift11_integral: 0.0,
            shift11_total: 0.0,
            shift12_resonant: s12,
            shift12_integral: 0.0,
            shift12_total: s12,
            rates_converged: true,
            shifts_converged: true,
        }
    }

    #[test]
    fn dicke_limits() {
        let d = dicke_levels(&result(3.0, 3.0, 0.0));
        assert_eq!((d.symmetric.decay, d.antisymmetric.decay), (6.0, 0.0));
        assert!(d.superradiance_factor.is_infinite());

        let d = dicke_levels(&result(2.0, 0.0, 1.0));
        assert_eq!(d.symmetric.decay, d.antisymmetric.decay);
        assert_eq!((d.symmetric.shift, d.antisymmetric.shift), (1.0, -1.0));

        let d = dicke_levels(&result(2.0, -1.0, 0.0));
        assert_eq!((d.symmetric.decay, d.antisymmetric.decay), (1.0, 3.0));
    }

    #[test]
    fn markov_threshold() {
        let w = 2.0 * std::f64::consts::PI;
        let coupling = 1e-3 * w;
        assert!(!markov_check(coupling, 1.0).unwrap().warning);
        assert!(markov_check(coupling, 100.0).unwrap().warning);
        // Exactly at threshold is not a warning.
        assert!(!markov_check(0.1, 1.0).unwrap().warning);
        assert!(markov_check(1.0, 0.0).is_err());
    }

    #[test]
    fn semidefinite_check() {
        assert!(result(1.0, 1.0, 0.0).is_positive_semidefinite());
        assert!(!result(1.0, 1.1, 0.0).is_positive_semidefinite());
    }

    #[test]
    fn dipoles_must_be_unit() {
        let p = CylPoint::new(0.02, 0.0, 0.0);
        assert!(EmitterPair::new(p, p, [1.0, 0.0, 0.0], [0.6, 0.8, 0.0], 1.0).is_ok());
        assert!(EmitterPair::new(p, p, [1.0, 0.1, 0.0], [1.0, 0.0, 0.0], 1.0).is_err());
    }
}
