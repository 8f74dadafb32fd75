//! Rates and shifts for many separations at once.
//!
//! The contracted spectral integrand is tabulated once per frequency node
//! (real `ω_A`, and every `iκ` node of the shift integral); each table is then
//! Fourier transformed for all separations together.

use std::f64::consts::PI;
use std::sync::atomic::{AtomicBool, Ordering};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{EmitterPair, RateShiftResult, WireSystem};
use crate::error::{Error, Result};
use crate::gvac::{green_vacuum, green_vacuum_im_coincident, Tensor3, COINCIDENCE_GUARD};
use crate::gwire::{
    floored_options, gap, pole_hint, spectral_green_nudged, AzimuthalOptions, EVEN_IN_KZ,
};
use crate::material::SpectralPoint;
use crate::spectral::{
    imag_axis_integrate_vec, ImagAxisOptions, KzParity, KzTable, TableOptions,
    NODE_BUDGET,
};

/// `κ·gap` beyond which the medium response is dropped (`e^{-40} ≈ 4e-18`).
const KAPPA_GAP_CUTOFF: f64 = 40.0;

/// `κ·|Δz|` beyond which a pair term at imaginary frequency is dropped.
const KAPPA_DZ_CUTOFF: f64 = 40.0;

/// Quadrature controls for [`RateShiftEngine`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    /// Relative tolerance of the kz tables and of the κ integral.
    pub tol: f64,
    pub azimuthal: AzimuthalOptions,
    /// Node budget of the κ integral.
    pub node_budget: usize,
}

impl SweepOptions {
    pub fn new(tol: f64) -> Self {
        Self { tol, azimuthal: AzimuthalOptions::default(), node_budget: NODE_BUDGET }
    }
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self::new(1e-6)
    }
}

/// One contracted component `d1·G̃(ρ1, ρ2, Δφ)·d2`.
#[derive(Debug, Clone, Copy)]
struct Channel {
    rho1: f64,
    rho2: f64,
    dphi: f64,
    d1: [f64; 3],
    d2: [f64; 3],
    /// Keep the kz-odd part as a separate column.
    split: bool,
}

impl Channel {
    fn width(&self) -> usize {
        if self.split {
            2
        } else {
            1
        }
    }

    fn contract(&self, t: &Tensor3, out: &mut Vec<Complex64>) {
        let mut even = Complex64::new(0.0, 0.0);
        let mut odd = even;
        for i in 0..3 {
            for j in 0..3 {
                let v = t.0[i][j] * (self.d1[i] * self.d2[j]);
                if EVEN_IN_KZ[3 * i + j] {
                    even += v;
                } else {
                    odd += v;
                }
            }
        }
        out.push(even);
        if self.split {
            out.push(odd);
        }
    }

    fn parities(&self) -> Vec<KzParity> {
        if self.split {
            vec![KzParity::Even, KzParity::Odd]
        } else {
            vec![KzParity::Even]
        }
    }
}

/// Computes [`RateShiftResult`]s for a pair whose second emitter slides
/// along the wire axis.
#[derive(Debug, Clone)]
pub struct RateShiftEngine {
    system: WireSystem,
    opts: SweepOptions,
    /// Pair channel, then the self channel(s).
    channels: Vec<Channel>,
    /// Index of the second emitter's self channel (1 when it matches the first).
    self2: usize,
    gap: f64,
}

impl RateShiftEngine {
    pub fn new(system: WireSystem, opts: SweepOptions) -> Result<Self> {
        system.validate()?;
        let geom = &system.geometry;
        if geom.model.gamma_p == 0.0 {
            return Err(Error::Domain(
                "lossless metal puts the plasmon pole on the real kz axis".into(),
            ));
        }
        let p = &system.pair;
        let (r1, r2) = (p.position_1.rho, p.position_2.rho);
        let mut channels = vec![
            Channel { rho1: r1, rho2: r2, dphi: p.position_1.phi - p.position_2.phi, d1: p.dipole_1, d2: p.dipole_2, split: true },
            Channel { rho1: r1, rho2: r1, dphi: 0.0, d1: p.dipole_1, d2: p.dipole_1, split: false },
        ];
        let self2 = if r2 == r1 && p.dipole_2 == p.dipole_1 {
            1
        } else {
            channels.push(Channel { rho1: r2, rho2: r2, dphi: 0.0, d1: p.dipole_2, d2: p.dipole_2, split: false });
            2
        };
        let gap = gap(geom, r1, r1).min(gap(geom, r2, r2)).min(gap(geom, r1, r2));
        Ok(Self { system, opts, channels, self2, gap })
    }

    pub fn system(&self) -> &WireSystem {
        &self.system
    }

    fn columns(&self) -> usize {
        self.channels.iter().map(Channel::width).sum()
    }

    fn parities(&self) -> Vec<KzParity> {
        self.channels.iter().flat_map(Channel::parities).collect()
    }

    /// Azimuthal options with an absolute floor from the real-frequency scale,
    /// shared by every frequency node.
    fn azimuthal(&self) -> Result<Vec<AzimuthalOptions>> {
        let s = SpectralPoint::Real(self.system.pair.omega_a);
        self.channels
            .iter()
            .map(|c| floored_options(&self.system.geometry, c.rho1, c.rho2, c.dphi, s, &self.opts.azimuthal))
            .collect()
    }

    /// Floors at the scale of frequency `s`, never below those of `base`.
    fn azimuthal_at(&self, s: SpectralPoint, base: &[AzimuthalOptions]) -> Result<Vec<AzimuthalOptions>> {
        self.channels
            .iter()
            .zip(base)
            .map(|(c, b)| {
                let local = floored_options(&self.system.geometry, c.rho1, c.rho2, c.dphi, s, &self.opts.azimuthal)?;
                Ok(AzimuthalOptions { abs_floor: local.abs_floor.max(b.abs_floor), ..local })
            })
            .collect()
    }

    fn table(&self, s: SpectralPoint, azimuthal: &[AzimuthalOptions]) -> Result<KzTable> {
        let geom = &self.system.geometry;
        let columns = self.columns();
        let integrand = |kz: f64| -> Result<Vec<Complex64>> {
            let mut out = Vec::with_capacity(columns);
            for (c, opts) in self.channels.iter().zip(azimuthal) {
                let t = spectral_green_nudged(geom, c.rho1, c.rho2, c.dphi, s, kz, opts)?;
                c.contract(&t, &mut out);
            }
            Ok(out)
        };
        let mut opts = TableOptions { decay_length: self.gap, ..TableOptions::new(self.opts.tol) };
        if let SpectralPoint::Real(w) = s {
            opts.singular_points.push(w);
            opts.pole = pole_hint(geom, w, self.gap)?;
        }
        KzTable::build(integrand, columns, &opts)
    }

    /// Medium Green's function contracted per channel: the pair value at each
    /// axial offset `z1 − z2`, and each self value at zero offset.
    fn transform(&self, table: &KzTable, offsets: &[f64]) -> (Vec<Complex64>, Vec<Complex64>) {
        let mut all = Vec::with_capacity(offsets.len() + 1);
        all.push(0.0);
        all.extend_from_slice(offsets);
        let ft = table.fourier(&all, &self.parities());
        let pair = ft[1..].iter().map(|row| row[0] + row[1]).collect();
        let selfs = ft[0][2..].to_vec();
        (pair, selfs)
    }

    /// Full result for each separation `Δz = z2 − z1` (second emitter moved).
    pub fn evaluate(&self, dzs: &[f64]) -> Result<Vec<RateShiftResult>> {
        if let Some(bad) = dzs.iter().find(|d| !d.is_finite()) {
            return Err(Error::Domain(format!("separation {bad} is not finite")));
        }
        let pair0 = &self.system.pair;
        let w = pair0.omega_a;
        let azimuthal = self.azimuthal()?;
        // Axial offsets z1 − z2 with z2 = z1 + Δz.
        let offsets: Vec<f64> = dzs.iter().map(|dz| -dz).collect();

        // Resonant part at the transition frequency.
        let real = self.table(SpectralPoint::Real(w), &azimuthal)?;
        let (pair_real, self_real) = self.transform(&real, &offsets);
        let g11 = 1.0 + 6.0 * PI / w * self_real[0].im;
        let g22 = 1.0 + 6.0 * PI / w * self_real[self.self2 - 1].im;

        // Integral part over imaginary frequencies.
        let n_self = self.channels.len() - 1;
        let dim = n_self + dzs.len();
        let tables_ok = AtomicBool::new(true);
        let g = |kappa: f64| -> Result<Vec<f64>> {
            if kappa * self.gap > KAPPA_GAP_CUTOFF {
                return Ok(vec![0.0; dim]);
            }
            let s = SpectralPoint::Imaginary(kappa);
            let table = self.table(s, &self.azimuthal_at(s, &azimuthal)?)?;
            if !table.converged {
                tables_ok.store(false, Ordering::Relaxed);
            }
            let near: Vec<usize> =
                (0..dzs.len()).filter(|&i| kappa * offsets[i].abs() <= KAPPA_DZ_CUTOFF).collect();
            let near_offsets: Vec<f64> = near.iter().map(|&i| offsets[i]).collect();
            let (pair, selfs) = self.transform(&table, &near_offsets);
            let mut out: Vec<f64> = selfs.iter().map(|v| v.re).collect();
            out.resize(dim, 0.0);
            for (slot, v) in near.iter().zip(pair) {
                out[n_self + slot] = v.re;
            }
            Ok(out)
        };
        // Shifts are judged on the scale of the single-emitter rate:
        // δω/Γ0 = 3 I/ω_A³, so an error tol·Γ11 in δω is tol·Γ11·ω_A³/3 in I.
        let abs = self.opts.tol * g11.min(g22).max(1.0) * w.powi(3) / 3.0;
        let opts = ImagAxisOptions { tol: self.opts.tol, floor: 0.0, abs, node_budget: self.opts.node_budget };
        let integral = imag_axis_integrate_vec(g, dim, w, &opts)?;
        let allowed: Vec<f64> = integral.values.iter().map(|v| self.opts.tol * v.norm() + abs).collect();
        let component_ok =
            |i: usize| integral.converged || integral.errors[i] <= allowed[i];
        let tables_ok = tables_ok.load(Ordering::Relaxed) && real.converged;

        let shift = |resonant: Complex64, integral: f64| {
            let r = 3.0 * PI / w * resonant.re;
            let i = 3.0 / w.powi(3) * integral;
            (r, i, r + i)
        };
        let (s11r, s11i, s11t) = shift(self_real[0], integral.values[0].re);

        let mut rows = Vec::with_capacity(dzs.len());
        for (i, &dz) in dzs.iter().enumerate() {
            let pair = pair0.with_separation(dz);
            let vac = vacuum_im(&pair)?;
            let g12 = 6.0 * PI / w * (pair_real[i].im + vac);
            let (s12r, s12i, s12t) = shift(pair_real[i], integral.values[n_self + i].re);
            rows.push(RateShiftResult {
                dz,
                gamma11: g11,
                gamma22: g22,
                gamma12: g12,
                shift11_resonant: s11r,
                shift11_integral: s11i,
                shift11_total: s11t,
                shift12_resonant: s12r,
                shift12_integral: s12i,
                shift12_total: s12t,
                rates_converged: real.converged,
                shifts_converged: tables_ok && component_ok(0) && component_ok(n_self + i),
            });
        }
        Ok(rows)
    }
}

/// `Im d1·G^vac(r1, r2, ω_A)·d2`, with the closed-form limit at coincidence.
fn vacuum_im(pair: &EmitterPair) -> Result<f64> {
    let (a, b) = (pair.position_1.to_cartesian(), pair.position_2.to_cartesian());
    let sep = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
    if sep < COINCIDENCE_GUARD {
        let dot: f64 = pair.dipole_1.iter().zip(&pair.dipole_2).map(|(x, y)| x * y).sum();
        return Ok(green_vacuum_im_coincident(pair.omega_a) * dot);
    }
    let g = green_vacuum(a, b, SpectralPoint::Real(pair.omega_a))?
        .to_cylindrical(pair.position_1.phi, pair.position_2.phi);
    Ok(g.value.contract(pair.dipole_1, pair.dipole_2).im)
}
