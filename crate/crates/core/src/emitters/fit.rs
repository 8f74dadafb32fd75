//! Two-Lorentzian model of the plasmon peak in `Im G̃_rr(kz)` and the
//! closed-form rates and shifts it implies.

use std::f64::consts::PI;

use levenberg_marquardt::{LeastSquaresProblem, LevenbergMarquardt};
use nalgebra::storage::Owned;
use nalgebra::{DVector, Dyn, OMatrix, Vector3, U3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gwire::{floored_options, spectral_green_nudged, AzimuthalOptions, WireGeometry};
use crate::material::SpectralPoint;

/// Points in the coarse scan that locates the peak.
const SCAN_POINTS: usize = 1200;

/// Points in the fit window.
const WINDOW_POINTS: usize = 1601;

/// Largest Bessel argument the scan may request, with margin.
const SCAN_ARGUMENT_LIMIT: f64 = 5.0e3;

/// Peaks whose rate bound `(6π/ω)·peak·kz` falls below this many Γ0 are
/// treated as no plasmon at all.
const NEGLIGIBLE_RATE: f64 = 1e-6;

/// `A/(1 + (kz − k_pl)²/γ²) + A/(1 + (kz + k_pl)²/γ²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoLorentzian {
    pub amplitude: f64,
    pub width: f64,
    pub center: f64,
}

impl TwoLorentzian {
    pub fn eval(&self, kz: f64) -> f64 {
        let l = |x: f64| self.amplitude / (1.0 + (x / self.width).powi(2));
        l(kz - self.center) + l(kz + self.center)
    }

    /// Partial derivatives with respect to (A, γ, k_pl).
    fn gradient(&self, kz: f64) -> [f64; 3] {
        let (a, g, c) = (self.amplitude, self.width, self.center);
        let mut out = [0.0; 3];
        for (x, sign) in [(kz - c, -1.0), (kz + c, 1.0)] {
            let u = x / g;
            let d = 1.0 + u * u;
            out[0] += 1.0 / d;
            out[1] += 2.0 * a * u * u / (g * d * d);
            // ∂/∂c of A/(1 + x²/γ²) with x = kz ∓ c.
            out[2] += sign * -2.0 * a * x / (g * g * d * d);
        }
        out
    }
}

/// Fitted plasmon resonance at one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LorentzianFit {
    pub amplitude_a: f64,
    pub width_gamma: f64,
    pub center_kz_pl: f64,
    /// Relative L2 misfit over the window.
    pub fit_residual: f64,
    /// Frequency the spectrum was taken at.
    pub omega: f64,
}

impl LorentzianFit {
    pub fn model(&self) -> TwoLorentzian {
        TwoLorentzian { amplitude: self.amplitude_a, width: self.width_gamma, center: self.center_kz_pl }
    }
}

struct Problem<'a> {
    kz: &'a [f64],
    y: &'a [f64],
    p: Vector3<f64>,
}

impl Problem<'_> {
    fn model(&self) -> TwoLorentzian {
        TwoLorentzian { amplitude: self.p[0], width: self.p[1], center: self.p[2] }
    }
}

impl LeastSquaresProblem<f64, Dyn, U3> for Problem<'_> {
    type ResidualStorage = Owned<f64, Dyn>;
    type JacobianStorage = Owned<f64, Dyn, U3>;
    type ParameterStorage = Owned<f64, U3>;

    fn set_params(&mut self, p: &Vector3<f64>) {
        self.p.copy_from(p);
    }

    fn params(&self) -> Vector3<f64> {
        self.p
    }

    fn residuals(&self) -> Option<DVector<f64>> {
        let m = self.model();
        Some(DVector::from_iterator(self.kz.len(), self.kz.iter().zip(self.y).map(|(k, y)| m.eval(*k) - y)))
    }

    fn jacobian(&self) -> Option<OMatrix<f64, Dyn, U3>> {
        let m = self.model();
        let mut j = OMatrix::<f64, Dyn, U3>::zeros(self.kz.len());
        for (row, k) in self.kz.iter().enumerate() {
            let g = m.gradient(*k);
            for col in 0..3 {
                j[(row, col)] = g[col];
            }
        }
        Some(j)
    }
}

/// Least-squares fit of [`TwoLorentzian`] to `(kz, Im G̃_rr)` samples.
///
/// Only samples in `[omega, 4·kz_guess]` enter, where `kz_guess` is the
/// location of the largest sample above `omega`.
pub fn fit_two_lorentzian(samples: &[(f64, f64)], omega: f64) -> Result<LorentzianFit> {
    let above: Vec<(f64, f64)> =
        samples.iter().copied().filter(|(k, y)| *k > omega && y.is_finite()).collect();
    let (idx, &(guess_kz, peak)) = above
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .ok_or_else(|| Error::Fit("no samples above the light line".into()))?;
    if !(peak > 0.0) {
        return Err(Error::Fit("spectrum has no positive peak".into()));
    }
    if idx == 0 || idx + 1 == above.len() {
        return Err(Error::Fit(format!("maximum at the edge of the sampled range (kz = {guess_kz})")));
    }
    let window: Vec<(f64, f64)> =
        above.iter().copied().filter(|(k, _)| *k <= 4.0 * guess_kz).collect();

    // Half width at half maximum from the samples on either side.
    let half = 0.5 * peak;
    let right = above[idx..].iter().find(|(_, y)| *y < half).map(|(k, _)| k - guess_kz);
    let left = above[..idx].iter().rev().find(|(_, y)| *y < half).map(|(k, _)| guess_kz - k);
    let hwhm = match (left, right) {
        (Some(l), Some(r)) => 0.5 * (l + r),
        (Some(w), None) | (None, Some(w)) => w,
        (None, None) => return Err(Error::Fit("peak is not resolved by the samples".into())),
    };

    let kz: Vec<f64> = window.iter().map(|s| s.0).collect();
    let y: Vec<f64> = window.iter().map(|s| s.1).collect();
    let problem = Problem { kz: &kz, y: &y, p: Vector3::new(peak, hwhm, guess_kz) };
    let (solved, report) = LevenbergMarquardt::new()
        .with_ftol(1e-15)
        .with_xtol(1e-15)
        .with_gtol(1e-15)
        .with_patience(400)
        .minimize(problem);
    if !report.termination.was_successful() {
        return Err(Error::Fit(format!("least squares stopped: {:?}", report.termination)));
    }
    let m = solved.model();
    if !(m.amplitude > 0.0 && m.width > 0.0 && m.center > omega) {
        return Err(Error::Fit(format!("unphysical parameters {m:?}")));
    }
    let norm: f64 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    let misfit: f64 = kz.iter().zip(&y).map(|(k, v)| (m.eval(*k) - v).powi(2)).sum::<f64>().sqrt();
    Ok(LorentzianFit {
        amplitude_a: m.amplitude,
        width_gamma: m.width.abs(),
        center_kz_pl: m.center,
        fit_residual: misfit / norm,
        omega,
    })
}

/// `Im G̃_rr(ρ, ρ, 0; kz)` at real frequency `omega` on the given kz values.
pub fn plasmon_spectrum(geom: &WireGeometry, rho: f64, omega: f64, kz: &[f64]) -> Result<Vec<f64>> {
    let s = SpectralPoint::Real(omega);
    let opts = floored_options(geom, rho, rho, 0.0, s, &AzimuthalOptions::default())?;
    kz.iter()
        .map(|&k| Ok(spectral_green_nudged(geom, rho, rho, 0.0, s, k, &opts)?.0[0][0].im))
        .collect()
}

/// Locates the plasmon peak of `Im G̃_rr` at distance `rho` and samples the
/// fit window `[omega, 4·kz_guess]` around it.
pub fn plasmon_window(geom: &WireGeometry, rho: f64, omega: f64) -> Result<Vec<(f64, f64)>> {
    if !(omega > 0.0) {
        return Err(Error::Domain(format!("frequency must be positive, got {omega}")));
    }
    let lo = omega * (1.0 + 1e-6);
    let hi = (50.0 * omega).max(20.0 / geom.radius).min(SCAN_ARGUMENT_LIMIT / rho);
    if !(hi > lo) {
        return Err(Error::Fit("empty scan range".into()));
    }
    let scan: Vec<f64> =
        (0..SCAN_POINTS).map(|i| lo * (hi / lo).powf(i as f64 / (SCAN_POINTS - 1) as f64)).collect();
    let values = plasmon_spectrum(geom, rho, omega, &scan)?;
    let coarse: Vec<(f64, f64)> = scan.into_iter().zip(values).collect();
    let (idx, &(guess, peak)) = coarse
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .ok_or_else(|| Error::Fit("empty scan".into()))?;
    if idx == 0 || idx + 1 == coarse.len() {
        return Err(Error::Fit("no interior maximum above the light line".into()));
    }
    let bound = 6.0 * PI / omega * peak * guess;
    if !(bound >= NEGLIGIBLE_RATE) {
        return Err(Error::Fit(format!("no bound plasmon: spectrum is flat (peak {peak:.3e}, rate bound {bound:.3e} Γ0)")));
    }

    // Uniform sampling of the fit window, fine enough to resolve the peak.
    let top = 4.0 * guess;
    let grid: Vec<f64> = (0..WINDOW_POINTS)
        .map(|i| omega + (top - omega) * (i as f64 + 0.5) / WINDOW_POINTS as f64)
        .collect();
    let values = plasmon_spectrum(geom, rho, omega, &grid)?;
    Ok(grid.into_iter().zip(values).collect())
}

/// Samples the plasmon peak with [`plasmon_window`] and fits it.
pub fn fit_plasmon_lorentzian(geom: &WireGeometry, rho: f64, omega: f64) -> Result<LorentzianFit> {
    let samples = plasmon_window(geom, rho, omega)?;
    let fit = fit_two_lorentzian(&samples, omega)?;
    if fit.fit_residual > 0.5 {
        return Err(Error::Fit(format!("spectrum is not peaked (misfit {:.3})", fit.fit_residual)));
    }
    Ok(fit)
}

/// Plasmon-channel estimates of the rates and shift.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Approximations {
    /// Wire-induced single-emitter rate, in units of Γ0.
    pub gamma11_appr: f64,
    pub gamma12_over_gamma11: f64,
    pub shift12_over_gamma11: f64,
}

/// `Γ11 ≈ (6π/ω_A)·2πAγ`, `Γ12/Γ11 ≈ e^{−γΔz} cos(k_pl Δz)` and
/// `δω12/Γ11 ≈ −½ e^{−γΔz} sin(k_pl Δz)`.
pub fn analytic_approximations(fit: &LorentzianFit, dz: f64) -> Result<Approximations> {
    if !(dz >= 0.0) {
        return Err(Error::Domain(format!("separation must be non-negative, got {dz}")));
    }
    let im_g = 2.0 * PI * fit.amplitude_a * fit.width_gamma;
    let damp = (-fit.width_gamma * dz).exp();
    let (s, c) = (fit.center_kz_pl * dz).sin_cos();
    Ok(Approximations {
        gamma11_appr: 6.0 * PI * im_g / fit.omega,
        gamma12_over_gamma11: damp * c,
        shift12_over_gamma11: -0.5 * damp * s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradient_matches_finite_differences() {
        let m = TwoLorentzian { amplitude: 2.0, width: 0.3, center: 5.0 };
        let g = m.gradient(5.2);
        let h = 1e-6;
        let num = [
            (TwoLorentzian { amplitude: 2.0 + h, ..m }.eval(5.2) - TwoLorentzian { amplitude: 2.0 - h, ..m }.eval(5.2)) / (2.0 * h),
            (TwoLorentzian { width: 0.3 + h, ..m }.eval(5.2) - TwoLorentzian { width: 0.3 - h, ..m }.eval(5.2)) / (2.0 * h),
            (TwoLorentzian { center: 5.0 + h, ..m }.eval(5.2) - TwoLorentzian { center: 5.0 - h, ..m }.eval(5.2)) / (2.0 * h),
        ];
        for i in 0..3 {
            assert!((g[i] - num[i]).abs() < 1e-6 * num[i].abs().max(1.0), "{i}: {} vs {}", g[i], num[i]);
        }
    }

    #[test]
    fn coincident_separation() {
        let fit = LorentzianFit { amplitude_a: 1.0, width_gamma: 0.5, center_kz_pl: 9.0, fit_residual: 0.0, omega: 2.0 * PI };
        let a = analytic_approximations(&fit, 0.0).unwrap();
        assert_eq!(a.gamma12_over_gamma11, 1.0);
        assert_eq!(a.shift12_over_gamma11, 0.0);
    }

    #[test]
    fn quarter_period_separation() {
        let fit = LorentzianFit { amplitude_a: 1.0, width_gamma: 1e-12, center_kz_pl: 9.0, fit_residual: 0.0, omega: 2.0 * PI };
        let a = analytic_approximations(&fit, 0.5 * PI / 9.0).unwrap();
        assert!(a.gamma12_over_gamma11.abs() < 1e-12);
        assert!((a.shift12_over_gamma11.abs() - 0.5).abs() < 1e-12);
    }
}
