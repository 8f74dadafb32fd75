//! Piecewise-Chebyshev tables of a spectral integrand on `[0, K_max]`, and
//! their Fourier integrals for many separations at once.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::adaptive::{clenshaw, Mesh, Rule, Tolerance};
use super::rules::gauss_legendre;
use super::{kz_breakpoints, PoleHint, NODE_BUDGET};
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Symmetry of a component under `kz → −kz`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KzParity {
    /// Whole-line transform is `2∫₀^∞ cos(kzΔz) f`.
    Even,
    /// Whole-line transform is `2i∫₀^∞ sin(kzΔz) f`.
    Odd,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableOptions {
    pub tol: f64,
    pub floor: f64,
    pub pole: Option<PoleHint>,
    pub singular_points: Vec<f64>,
    pub decay_length: f64,
    pub node_budget: usize,
}

impl TableOptions {
    pub fn new(tol: f64) -> Self {
        Self {
            tol,
            floor: 1e-3,
            pole: None,
            singular_points: Vec::new(),
            decay_length: 0.0,
            node_budget: 4 * NODE_BUDGET,
        }
    }
}

#[derive(Debug, Clone)]
struct TablePanel {
    a: f64,
    b: f64,
    coeffs: Vec<Vec<Complex64>>,
}

/// Interpolant of a vector integrand on `[0, k_max]`.
#[derive(Debug, Clone)]
pub struct KzTable {
    pub dim: usize,
    panels: Vec<TablePanel>,
    pub k_max: f64,
    pub nodes_used: usize,
    pub converged: bool,
    /// Estimated L1 error per component, truncation included.
    pub l1_error: Vec<f64>,
    /// ∫|f_i| per component.
    pub l1_norm: Vec<f64>,
}

impl KzTable {
    pub fn build<F>(f: F, dim: usize, opts: &TableOptions) -> Result<KzTable>
    where
        F: Fn(f64) -> Result<Vec<Complex64>> + Sync,
    {
        let (pts, extent) = kz_breakpoints(&opts.singular_points, opts.pole, opts.decay_length);
        let tol = Tolerance { rel: opts.tol, floor: opts.floor, abs: 0.0 };
        let mut mesh = Mesh::new(&f, dim, Rule::Chebyshev, opts.node_budget);
        let intervals: Vec<(f64, f64)> = pts.windows(2).map(|w| (w[0], w[1])).collect();
        mesh.extend(&intervals)?;
        let mut converged = mesh.refine(&tol)?;

        let mut k = extent;
        let mut quiet = 0;
        let mut truncation = vec![0.0; dim];
        while quiet < 2 {
            if mesh.remaining() < 2 * super::adaptive::CHEB_N {
                converged = false;
                break;
            }
            mesh.extend(&[(k, 2.0 * k)])?;
            converged &= mesh.refine(&tol)?;
            let allowed = tol.allowed(&mesh.scale());
            let last: Vec<f64> = (0..dim)
                .map(|i| {
                    mesh.panels
                        .iter()
                        .filter(|p| p.a >= k)
                        .map(|p| p.l1[i])
                        .sum::<f64>()
                })
                .collect();
            truncation = last.clone();
            let small = last.iter().zip(&allowed).all(|(l, a)| *l <= 0.01 * a);
            quiet = if small { quiet + 1 } else { 0 };
            k *= 2.0;
            if !k.is_finite() {
                return Err(Error::Domain("spectral integrand does not decay".into()));
            }
        }
        let (_, err) = mesh.totals();
        let l1_norm = mesh.scale();
        let l1_error: Vec<f64> = err.iter().zip(&truncation).map(|(e, t)| e + t).collect();
        let panels = mesh
            .panels
            .iter()
            .map(|p| TablePanel { a: p.a, b: p.b, coeffs: p.coeffs.clone() })
            .collect();
        Ok(KzTable {
            dim,
            panels,
            k_max: k,
            nodes_used: mesh.nodes_used,
            converged,
            l1_error,
            l1_norm,
        })
    }

    pub fn panel_count(&self) -> usize {
        self.panels.len()
    }

    /// Interpolated value at `kz` (zero beyond the table).
    pub fn eval(&self, kz: f64) -> Vec<Complex64> {
        let idx = self.panels.partition_point(|p| p.b < kz);
        match self.panels.get(idx) {
            Some(p) if kz >= p.a => {
                let t = (2.0 * kz - p.a - p.b) / (p.b - p.a);
                p.coeffs.iter().map(|c| clenshaw(c, t)).collect()
            }
            _ => vec![ZERO; self.dim],
        }
    }

    /// Whole-line Fourier integrals `∫ e^{ikzΔz} f(kz) dkz` for each Δz,
    /// each component folded by its parity. Indexed `[Δz][component]`.
    pub fn fourier(&self, dzs: &[f64], parity: &[KzParity]) -> Vec<Vec<Complex64>> {
        assert_eq!(parity.len(), self.dim);
        let dz_max = dzs.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        let (gx, gw) = gauss_legendre(16);
        // Fine Gauss-Legendre sampling of the interpolant, resolving half a
        // period of the fastest phase per sub-panel.
        let sub = if dz_max > 0.0 { PI / dz_max } else { f64::INFINITY };
        let samples: Vec<(f64, f64, Vec<Complex64>)> = self
            .panels
            .par_iter()
            .flat_map_iter(|p| {
                let width = p.b - p.a;
                let m = ((width / sub).ceil() as usize).max(1);
                let step = width / m as f64;
                let mut out = Vec::with_capacity(16 * m);
                for s in 0..m {
                    let lo = p.a + s as f64 * step;
                    let (c, h) = (lo + 0.5 * step, 0.5 * step);
                    for (x, w) in gx.iter().zip(&gw) {
                        let k = c + h * x;
                        let t = (2.0 * k - p.a - p.b) / width;
                        let v = p.coeffs.iter().map(|cf| clenshaw(cf, t)).collect();
                        out.push((k, w * h, v));
                    }
                }
                out
            })
            .collect();

        dzs.par_iter()
            .map(|&dz| {
                let mut acc = vec![ZERO; self.dim];
                for (k, w, v) in &samples {
                    let (sn, cs) = (k * dz).sin_cos();
                    for i in 0..self.dim {
                        let phase = match parity[i] {
                            KzParity::Even => cs,
                            KzParity::Odd => sn,
                        };
                        acc[i] += v[i] * (w * phase);
                    }
                }
                acc.iter()
                    .zip(parity)
                    .map(|(a, p)| match p {
                        KzParity::Even => 2.0 * a,
                        KzParity::Odd => 2.0 * I * a,
                    })
                    .collect()
            })
            .collect()
    }
}
