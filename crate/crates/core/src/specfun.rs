//! Integer-order cylinder functions of complex argument.
//!
//! Bessel functions `J_n` come from Miller's backward recurrence normalised
//! with the generating-function identity `e^{-iz} = J_0 + 2 Σ (-i)^n J_n`,
//! which has no cancellation anywhere in the closed upper half-plane.
//! Hankel functions `H_n^(1)` are seeded at orders 0 and 1 (power series for
//! small |z|, Steed's continued fraction plus the Wronskian otherwise) and
//! carried upward by forward recurrence.
//!
//! Internally everything is exponentially scaled so the ladders never
//! overflow for arguments far up the imaginary axis:
//! `J̃_n = J_n e^{-Im z}` and `H̃_n = H_n e^{-iz}`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Highest order the wire expansion is allowed to request.
pub const N_MAX: usize = 40;

/// Arguments with modulus below this use the Neumann power series for Y_0, Y_1.
const SERIES_RADIUS: f64 = 2.0;

/// Largest modulus accepted for the argument.
const ARGUMENT_GUARD: f64 = 1.0e4;

/// Magnitude at which the Hankel ladder is declared unrepresentable.
const HANKEL_CEILING: f64 = 1.0e290;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Unscaled values of `J_n`, `H_n^(1)` and their derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylFunValue {
    pub order: i32,
    pub argument: Complex64,
    pub j: Complex64,
    pub h1: Complex64,
    pub jprime: Complex64,
    pub h1prime: Complex64,
}

/// `J_n(z)`, `H_n^(1)(z)` and derivatives for a single integer order.
///
/// Negative orders use `J_{-n} = (-1)^n J_n` (likewise for `H^(1)`).
pub fn bessel_jh(order: i32, z: Complex64) -> Result<CylFunValue> {
    let top = order.unsigned_abs() as usize;
    let ladder = CylLadder::new(z, top)?;
    if ladder.top() < top {
        return Err(Error::Overflow(format!(
            "H^(1)_{order}({z}) exceeds the representable range"
        )));
    }
    let jscale = z.im.exp();
    let hscale = (I * z).exp();
    let value = CylFunValue {
        order,
        argument: z,
        j: ladder.j(order) * jscale,
        h1: ladder.h(order) * hscale,
        jprime: ladder.jp(order) * jscale,
        h1prime: ladder.hp(order) * hscale,
    };
    let finite = [value.j, value.h1, value.jprime, value.h1prime]
        .iter()
        .all(|v| v.re.is_finite() && v.im.is_finite());
    if !finite {
        return Err(Error::Overflow(format!(
            "order {order} at {z}: unscaled magnitude exceeds f64 range"
        )));
    }
    Ok(value)
}

/// Exponentially scaled `J_n`, `H_n^(1)` for all orders `0..=top` at one argument.
///
/// `J_n(z) = j(n) · e^{Im z}` and `H_n^(1)(z) = h(n) · e^{iz}`; the derivative
/// accessors share the same scale factors as the functions.
#[derive(Debug, Clone)]
pub struct CylLadder {
    z: Complex64,
    j: Vec<Complex64>,
    h: Vec<Complex64>,
}

impl CylLadder {
    pub fn new(z: Complex64, top: usize) -> Result<Self> {
        let modulus = z.norm();
        if !(modulus > 0.0) {
            return Err(Error::Domain("cylinder functions at z = 0".into()));
        }
        if !modulus.is_finite() || modulus > ARGUMENT_GUARD {
            return Err(Error::Overflow(format!("argument {z} beyond guard")));
        }
        if z.im < -1e-14 * modulus {
            return Err(Error::Domain(format!("argument {z} in the lower half-plane")));
        }
        // Tiny negative imaginary parts are rounding noise from the branch choice.
        let z = if z.im < 0.0 { Complex64::new(z.re, 0.0) } else { z };

        let len = top + 2;
        let j = miller_scaled(z, len);
        let h = hankel_scaled(z, &j, len);
        Ok(Self { z, j, h })
    }

    pub fn argument(&self) -> Complex64 {
        self.z
    }

    /// Highest order whose function and derivative are both available.
    pub fn top(&self) -> usize {
        self.h.len().saturating_sub(2).min(self.j.len() - 2)
    }

    pub fn j(&self, n: i32) -> Complex64 {
        signed(n, self.j[n.unsigned_abs() as usize])
    }

    pub fn h(&self, n: i32) -> Complex64 {
        signed(n, self.h[n.unsigned_abs() as usize])
    }

    pub fn jp(&self, n: i32) -> Complex64 {
        0.5 * (self.j(n - 1) - self.j(n + 1))
    }

    pub fn hp(&self, n: i32) -> Complex64 {
        0.5 * (self.h(n - 1) - self.h(n + 1))
    }
}

fn signed(n: i32, v: Complex64) -> Complex64 {
    if n < 0 && n % 2 != 0 {
        -v
    } else {
        v
    }
}

/// Miller backward recurrence, returning `J̃_0 .. J̃_{len-1}`.
fn miller_scaled(z: Complex64, len: usize) -> Vec<Complex64> {
    let modulus = z.norm();
    let reach = (len as f64).max(modulus.ceil()) + 20.0 + 12.0 * modulus.cbrt();
    let mut start = reach.ceil() as usize;
    start += start % 2;

    const RESCALE_AT: f64 = 1e200;
    let mut stored = vec![Complex64::new(0.0, 0.0); len];
    let mut above = Complex64::new(0.0, 0.0);
    let mut current = Complex64::new(1e-30, 0.0);
    // Σ' (-i)^k j_k accumulated from the top: weight 2 for k ≥ 1, 1 for k = 0.
    let mut norm = Complex64::new(0.0, 0.0);
    let inv_z = 1.0 / z;

    for k in (1..=start).rev() {
        if k < len {
            stored[k] = current;
        }
        norm += 2.0 * minus_i_pow(k) * current;
        let below = 2.0 * k as f64 * inv_z * current - above;
        above = current;
        current = below;
        if current.norm() > RESCALE_AT {
            let s = 1.0 / RESCALE_AT;
            current *= s;
            above *= s;
            norm *= s;
            for v in stored.iter_mut() {
                *v *= s;
            }
        }
    }
    stored[0] = current;
    norm += current;

    // J_n = e^{-iz} j_n / S, and J̃_n = J_n e^{-Im z} = e^{-i Re z} j_n / S.
    // Divide without forming |norm|², which may overflow.
    let size = norm.norm();
    let factor = Complex64::from_polar(1.0, -z.re) * (norm.conj() / size) / size;
    stored.iter().map(|v| v * factor).collect()
}

fn minus_i_pow(k: usize) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    }
}

/// Scaled Hankel ladder seeded from orders 0 and 1; stops early on overflow.
fn hankel_scaled(z: Complex64, j: &[Complex64], len: usize) -> Vec<Complex64> {
    let (h0, h1) = if z.norm() < SERIES_RADIUS {
        let jscale = z.im.exp();
        let (j0, j1) = (j[0] * jscale, j[1] * jscale);
        let (y0, y1) = neumann_series(z, j0, j1);
        let back = (-I * z).exp();
        ((j0 + I * y0) * back, (j1 + I * y1) * back)
    } else {
        let ratio = hankel_log_derivative(z);
        let h0 = 2.0 * I * Complex64::from_polar(1.0, -z.re) / (PI * z * (j[0] * ratio + j[1]));
        (h0, -ratio * h0)
    };

    let mut h = Vec::with_capacity(len);
    h.push(h0);
    h.push(h1);
    let inv_z = 1.0 / z;
    for n in 1..len - 1 {
        let next = 2.0 * n as f64 * inv_z * h[n] - h[n - 1];
        if !(next.norm() < HANKEL_CEILING) {
            break;
        }
        h.push(next);
    }
    h
}

/// Y_0 and Y_1 from their ascending series, given J_0 and J_1.
fn neumann_series(z: Complex64, j0: Complex64, j1: Complex64) -> (Complex64, Complex64) {
    let half = 0.5 * z;
    let log_half = half.ln();
    let q = -half * half;

    // Y_0: (2/π)(ln(z/2)+γ)J_0 − (2/π) Σ_{k≥1} H_k q^k/(k!)²
    let mut sum0 = Complex64::new(0.0, 0.0);
    let mut term = Complex64::new(1.0, 0.0);
    let mut harmonic = 0.0;
    for k in 1..200 {
        let kf = k as f64;
        term *= q / (kf * kf);
        harmonic += 1.0 / kf;
        let add = harmonic * term;
        sum0 += add;
        if add.norm() < 1e-18 * sum0.norm() {
            break;
        }
    }
    let y0 = (2.0 / PI) * ((log_half + EULER_GAMMA) * j0 - sum0);

    // Y_1: −2/(πz) + (2/π) ln(z/2) J_1 − (1/π)(z/2) Σ_{k≥0} [ψ(k+1)+ψ(k+2)] q^k/(k!(k+1)!)
    let mut sum1 = Complex64::new(0.0, 0.0);
    let mut term = Complex64::new(1.0, 0.0);
    let mut h_k = 0.0;
    for k in 0..200 {
        let kf = k as f64;
        if k > 0 {
            term *= q / (kf * (kf + 1.0));
            h_k += 1.0 / kf;
        }
        let h_k1 = h_k + 1.0 / (kf + 1.0);
        let add = (h_k + h_k1 - 2.0 * EULER_GAMMA) * term;
        sum1 += add;
        if k > 0 && add.norm() < 1e-18 * sum1.norm() {
            break;
        }
    }
    let y1 = -2.0 / (PI * z) + (2.0 / PI) * log_half * j1 - half * sum1 / PI;
    (y0, y1)
}

/// `H_0^(1)'(z) / H_0^(1)(z)` by Steed's continued fraction (modified Lentz).
fn hankel_log_derivative(z: Complex64) -> Complex64 {
    // Complex division squares the modulus, so keep TINY^2 representable.
    const TINY: f64 = 1e-150;
    let tiny = Complex64::new(TINY, 0.0);
    let mut f = tiny;
    let mut c = f;
    let mut d = Complex64::new(0.0, 0.0);
    for k in 1..100_000 {
        let a = (k as f64 - 0.5).powi(2);
        let b = 2.0 * (z + I * k as f64);
        d = b + a * d;
        if d.norm() == 0.0 {
            d = tiny;
        }
        c = b + a / c;
        if c.norm() == 0.0 {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).norm() < 1e-15 {
            break;
        }
    }
    -1.0 / (2.0 * z) + I + I / z * f
}
