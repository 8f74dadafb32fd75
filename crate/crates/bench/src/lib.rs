//! Fixtures shared by the benchmarks.

use std::f64::consts::PI;

use wireshift::emitters::TwoLorentzian;
use wireshift::{DrudeModel, WireGeometry};

pub const OMEGA_A: f64 = 2.0 * PI;
pub const RHO: f64 = 0.015;

/// Default wire: `a = 0.01`, Drude metal tuned to ω_A.
pub fn default_wire() -> WireGeometry {
    WireGeometry::new(0.01, DrudeModel::default_for(OMEGA_A)).expect("valid default wire")
}

/// `n` samples of a two-Lorentzian spectrum on `[ω_A, 4·k_pl]`.
pub fn synthetic_spectrum(m: &TwoLorentzian, n: usize) -> Vec<(f64, f64)> {
    let top = 4.0 * m.center;
    (0..n)
        .map(|i| {
            let k = OMEGA_A + (top - OMEGA_A) * (i as f64 + 0.5) / n as f64;
            (k, m.eval(k))
        })
        .collect()
}
