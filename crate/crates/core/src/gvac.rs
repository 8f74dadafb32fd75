//! Free-space dyadic Green's tensor and tensor frame handling.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::material::SpectralPoint;

/// Separations below this (in λ0) are treated as coincident.
pub const COINCIDENCE_GUARD: f64 = 1e-9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Complex 3×3 tensor, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tensor3(pub [[Complex64; 3]; 3]);

impl Tensor3 {
    pub fn zero() -> Self {
        Tensor3([[ZERO; 3]; 3])
    }

    pub fn identity() -> Self {
        let mut t = Self::zero();
        for i in 0..3 {
            t.0[i][i] = Complex64::new(1.0, 0.0);
        }
        t
    }

    pub fn outer(a: [f64; 3], b: [f64; 3]) -> Self {
        let mut t = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                t.0[i][j] = Complex64::new(a[i] * b[j], 0.0);
            }
        }
        t
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                t.0[i][j] = self.0[j][i];
            }
        }
        t
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0.iter().flatten().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest |Im| over all components.
    pub fn max_imag(&self) -> f64 {
        self.0.iter().flatten().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    /// `d1 · T · d2` for real vectors.
    pub fn contract(&self, d1: [f64; 3], d2: [f64; 3]) -> Complex64 {
        let mut acc = ZERO;
        for i in 0..3 {
            for j in 0..3 {
                acc += d1[i] * self.0[i][j] * d2[j];
            }
        }
        acc
    }

    /// `T · v` for a real vector.
    pub fn apply(&self, v: [f64; 3]) -> [Complex64; 3] {
        let mut out = [ZERO; 3];
        for (i, row) in self.0.iter().enumerate() {
            out[i] = row[0] * v[0] + row[1] * v[1] + row[2] * v[2];
        }
        out
    }

    /// `A · T · Bᵀ` for real rotation matrices.
    pub fn rotate(&self, a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> Self {
        let mut t = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = ZERO;
                for k in 0..3 {
                    for l in 0..3 {
                        acc += a[i][k] * self.0[k][l] * b[j][l];
                    }
                }
                t.0[i][j] = acc;
            }
        }
        t
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        let mut t = *self;
        for v in t.0.iter_mut().flatten() {
            *v = f(*v);
        }
        t
    }
}

impl Add for Tensor3 {
    type Output = Tensor3;
    fn add(self, rhs: Tensor3) -> Tensor3 {
        let mut t = self;
        for i in 0..3 {
            for j in 0..3 {
                t.0[i][j] += rhs.0[i][j];
            }
        }
        t
    }
}

impl Sub for Tensor3 {
    type Output = Tensor3;
    fn sub(self, rhs: Tensor3) -> Tensor3 {
        self + rhs.map(|v| -v)
    }
}

impl Mul<Complex64> for Tensor3 {
    type Output = Tensor3;
    fn mul(self, rhs: Complex64) -> Tensor3 {
        self.map(|v| v * rhs)
    }
}

impl Mul<f64> for Tensor3 {
    type Output = Tensor3;
    fn mul(self, rhs: f64) -> Tensor3 {
        self.map(|v| v * rhs)
    }
}

/// Basis in which a tensor's components are expressed.
///
/// `Cylindrical` uses the local (ρ̂, φ̂, ẑ) basis at the field point for the
/// row index and at the source point for the column index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Frame {
    Cartesian,
    Cylindrical { phi1: f64, phi2: f64 },
}

/// Rows are the local unit vectors (ρ̂, φ̂, ẑ) in Cartesian components.
pub fn cylindrical_basis(phi: f64) -> [[f64; 3]; 3] {
    let (s, c) = phi.sin_cos();
    [[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]]
}

fn transpose3(m: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut t = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            t[i][j] = m[j][i];
        }
    }
    t
}

/// Green's tensor value together with the frame of its components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DyadicGreen {
    pub value: Tensor3,
    pub frame: Frame,
}

impl DyadicGreen {
    pub fn to_cartesian(&self) -> DyadicGreen {
        match self.frame {
            Frame::Cartesian => *self,
            Frame::Cylindrical { phi1, phi2 } => {
                let a = transpose3(&cylindrical_basis(phi1));
                let b = transpose3(&cylindrical_basis(phi2));
                DyadicGreen { value: self.value.rotate(&a, &b), frame: Frame::Cartesian }
            }
        }
    }

    pub fn to_cylindrical(&self, phi1: f64, phi2: f64) -> DyadicGreen {
        let cart = self.to_cartesian();
        let value = cart.value.rotate(&cylindrical_basis(phi1), &cylindrical_basis(phi2));
        DyadicGreen { value, frame: Frame::Cylindrical { phi1, phi2 } }
    }
}

/// A point in cylindrical coordinates (ρ, φ, z), lengths in λ0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylPoint {
    pub rho: f64,
    pub phi: f64,
    pub z: f64,
}

impl CylPoint {
    pub fn new(rho: f64, phi: f64, z: f64) -> Self {
        Self { rho, phi, z }
    }

    pub fn to_cartesian(self) -> [f64; 3] {
        let (s, c) = self.phi.sin_cos();
        [self.rho * c, self.rho * s, self.z]
    }
}

/// Vacuum Green's tensor between two distinct Cartesian points.
///
/// `G = e^{ikR}/(4πR) [(1 + i/kR − 1/(kR)²) 𝟙 + (3/(kR)² − 3i/kR − 1) R̂R̂]`
/// with k = s. The contact term at R = 0 is never evaluated.
pub fn green_vacuum(r1: [f64; 3], r2: [f64; 3], s: SpectralPoint) -> Result<DyadicGreen> {
    let d = [r1[0] - r2[0], r1[1] - r2[1], r1[2] - r2[2]];
    let r = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    if !(r >= COINCIDENCE_GUARD) {
        return Err(Error::Coincidence { separation: r, limit: COINCIDENCE_GUARD });
    }
    let k = s.value();
    if k.norm() == 0.0 {
        return Err(Error::Domain("vacuum Green's tensor at zero frequency".into()));
    }
    let u = [d[0] / r, d[1] / r, d[2] / r];
    let i = Complex64::new(0.0, 1.0);
    let kr = k * r;
    let inv = 1.0 / kr;
    let inv2 = inv * inv;
    let pref = (i * kr).exp() / (4.0 * PI * r);
    let transverse = pref * (1.0 + i * inv - inv2);
    let longitudinal = pref * (3.0 * inv2 - 3.0 * i * inv - 1.0);
    let value = Tensor3::identity() * transverse + Tensor3::outer(u, u) * longitudinal;
    Ok(DyadicGreen { value, frame: Frame::Cartesian })
}

/// `Im G_ii(r, r, ω) = ω/(6π)` for real ω > 0 (c = 1).
pub fn green_vacuum_im_coincident(omega: f64) -> f64 {
    omega / (6.0 * PI)
}

/// Free-space decay rate `2ω² Im G_ii(r, r, ω)` in units of `d²/(ħε0)`,
/// which equals `ω³/(3π)`.
pub fn free_space_rate(omega: f64) -> f64 {
    2.0 * omega * omega * green_vacuum_im_coincident(omega)
}

/// `lim_{r→0} Im G_xx` along ẑ from [`green_vacuum`] at `r = h, h/2, h/4`,
/// Richardson extrapolated in `r²`.
///
/// The bare value at one small `r` is off by `(ωr)²/5` relative, and the
/// closed form cancels as `1/(ωr)³`, so extrapolation beats shrinking `r`.
pub fn im_coincident_limit(omega: f64, h: f64) -> Result<f64> {
    let at = |r: f64| -> Result<f64> {
        Ok(green_vacuum([0.0, 0.0, r], [0.0; 3], SpectralPoint::Real(omega))?.value.0[0][0].im)
    };
    let (f0, f1, f2) = (at(h)?, at(0.5 * h)?, at(0.25 * h)?);
    let r1 = (4.0 * f1 - f0) / 3.0;
    let r2 = (4.0 * f2 - f1) / 3.0;
    Ok((16.0 * r2 - r1) / 15.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const W: f64 = 2.0 * PI;

    #[test]
    fn transverse_component_term_by_term() {
        let g = green_vacuum([0.0, 0.0, 1.0], [0.0; 3], SpectralPoint::Real(W)).unwrap();
        // R̂ = ẑ, x = kR = 2π; e^{ix} = 1.
        let x = W;
        let expect = Complex64::new(1.0 - 1.0 / (x * x), 1.0 / x) / (4.0 * PI);
        assert!((g.value.0[0][0] - expect).norm() < 1e-12 * expect.norm());
        assert!(g.value.0[0][1].norm() < 1e-15);
    }

    #[test]
    fn coincident_points_rejected() {
        let p = [0.3, 0.1, -0.2];
        let q = [0.3, 0.1, -0.2 + 1e-10];
        assert!(matches!(
            green_vacuum(p, q, SpectralPoint::Real(W)),
            Err(Error::Coincidence { .. })
        ));
    }

    #[test]
    fn coincident_imaginary_part() {
        assert_relative_eq!(green_vacuum_im_coincident(W), 1.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(green_vacuum_im_coincident(6.0 * PI), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn imaginary_frequency_is_real() {
        let g = green_vacuum([0.1, -0.4, 0.7], [0.2, 0.3, 0.0], SpectralPoint::Imaginary(3.0))
            .unwrap();
        assert!(g.value.max_imag() <= 1e-14 * g.value.norm());
    }

    #[test]
    fn frame_round_trip() {
        let g = green_vacuum([0.1, -0.4, 0.7], [0.2, 0.3, 0.0], SpectralPoint::Real(W)).unwrap();
        let back = g.to_cylindrical(0.3, -1.2).to_cartesian();
        assert!((back.value - g.value).norm() < 1e-14 * g.value.norm());
    }

    #[test]
    fn cylindrical_components_at_zero_angle_are_cartesian() {
        let g = green_vacuum([0.1, -0.4, 0.7], [0.2, 0.3, 0.0], SpectralPoint::Real(W)).unwrap();
        let c = g.to_cylindrical(0.0, 0.0);
        assert!((c.value - g.value).norm() < 1e-15);
    }

    #[test]
    fn contraction_picks_components() {
        let g = green_vacuum([0.5, 0.0, 0.2], [0.0; 3], SpectralPoint::Real(W)).unwrap();
        let v = g.value.contract([1.0, 0.0, 0.0], [0.0, 0.0, 1.0]);
        assert_eq!(v, g.value.0[0][2]);
    }
}
