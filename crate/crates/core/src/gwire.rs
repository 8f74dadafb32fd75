//! Scattered Green's tensor of an infinite circular metal cylinder.
//!
//! The cylinder (radius `a`, Drude permittivity) lies along z. For each
//! longitudinal wavenumber `kz` the scattered field of a point dipole outside
//! the wire is expanded in cylindrical harmonics `e^{inφ}`. Per order, E_z and
//! H_z inside are `J_n(η_m ρ)` waves and outside the incident field plus
//! outgoing `H_n^(1)(η_0 ρ)` waves; continuity of E_z, H_z, E_φ, H_φ at ρ = a
//! gives a 4×4 system for the scattered amplitudes.
//!
//! Conventions: `∇×∇×G − s²εG = δ𝟙` with c = 1, and
//! `G^med(Δz) = ∫ dkz e^{ikzΔz} G̃(kz)` over the whole kz line. Components are
//! in the cylindrical frames (ρ̂, φ̂, ẑ) of the field point (rows) and source
//! point (columns).

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gvac::{CylPoint, DyadicGreen, Frame, Tensor3};
use crate::material::{DrudeModel, SpectralPoint};
use crate::spectral::{KzParity, KzTable, PoleHint, QuadratureReport, TableOptions};
use crate::specfun::{CylLadder, N_MAX};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Tensor components that are even in kz (the rest are odd).
///
/// Indexing is row-major over (ρ, φ, z).
pub const EVEN_IN_KZ: [bool; 9] = [true, true, false, true, true, false, false, false, true];

/// Cylinder radius and metal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WireGeometry {
    pub radius: f64,
    pub model: DrudeModel,
}

impl WireGeometry {
    pub fn new(radius: f64, model: DrudeModel) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Config(format!("wire radius must be > 0, got {radius}")));
        }
        if radius >= 0.5 {
            log::warn!("wire radius {radius} λ0 is not sub-wavelength; plasmon picture may not apply");
        }
        Ok(Self { radius, model })
    }
}

/// Truncation control for the azimuthal series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AzimuthalOptions {
    /// First truncation order tried.
    pub n_start: usize,
    /// Hard ceiling on the order.
    pub n_max: usize,
    /// Relative size of the outermost terms at which the series is accepted.
    pub tail_tol: f64,
    /// Absolute magnitude below which the tail is negligible regardless of the
    /// partial sum. Zero disables it.
    pub abs_floor: f64,
}

impl Default for AzimuthalOptions {
    fn default() -> Self {
        Self { n_start: 15, n_max: N_MAX, tail_tol: 1e-10, abs_floor: 0.0 }
    }
}

/// `G̃^med` at one kz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralGreenSample {
    pub kz: f64,
    pub tensor: Tensor3,
    pub frequency: SpectralPoint,
    /// Highest azimuthal order summed.
    pub order: usize,
}

/// Root with non-negative imaginary part.
pub(crate) fn radial_wavenumber(q: Complex64) -> Complex64 {
    let r = q.sqrt();
    if r.im < 0.0 {
        -r
    } else {
        r
    }
}

/// Spectral integrand `G̃^med(ρ1, ρ2, Δφ; kz)` with default truncation.
pub fn wire_spectral_green(
    geom: &WireGeometry,
    rho1: f64,
    rho2: f64,
    dphi: f64,
    s: SpectralPoint,
    kz: f64,
) -> Result<SpectralGreenSample> {
    wire_spectral_green_with(geom, rho1, rho2, dphi, s, kz, &AzimuthalOptions::default())
}

pub fn wire_spectral_green_with(
    geom: &WireGeometry,
    rho1: f64,
    rho2: f64,
    dphi: f64,
    s: SpectralPoint,
    kz: f64,
    opts: &AzimuthalOptions,
) -> Result<SpectralGreenSample> {
    let a = geom.radius;
    if !(rho1 > a && rho2 > a) {
        return Err(Error::Domain(format!(
            "points must lie outside the wire (ρ1 = {rho1}, ρ2 = {rho2}, a = {a})"
        )));
    }
    let eps_m = geom.model.permittivity(s)?;
    let sv = s.value();
    let k2 = sv * sv;
    // Factored so the light line kz = ω keeps its digits.
    let e0sq = (sv - kz) * (sv + kz);
    let emsq = k2 * eps_m - kz * kz;
    if e0sq.norm() == 0.0 || emsq.norm() == 0.0 {
        return Err(Error::Branch { kz });
    }
    let e0 = radial_wavenumber(e0sq);
    let em = radial_wavenumber(emsq);

    let n_max = opts.n_max.min(N_MAX);
    let lad_m = CylLadder::new(em * a, n_max)?;
    let lad_a = CylLadder::new(e0 * a, n_max)?;
    let lad_1 = CylLadder::new(e0 * rho1, n_max)?;
    let lad_2 = if rho2 == rho1 { lad_1.clone() } else { CylLadder::new(e0 * rho2, n_max)? };
    // Orders whose Hankel values are representable at every argument.
    let usable = lad_a.top().min(lad_1.top()).min(lad_2.top()).min(lad_m.top());

    // Exponential scaling shared by every order; undone at the end.
    let factor = (I * e0 * (rho1 + rho2 - a) + a * e0.im).exp();
    let unscale = factor.norm();

    let ctx = OrderContext { a, rho1, rho2, kz, s: sv, k2, eps_m, e0, em, e0sq, emsq };
    let ladders = [&lad_m, &lad_a, &lad_1, &lad_2];

    let mut sum = ctx.order_term(0, dphi, ladders)?;
    let mut order = 0;
    let mut last = sum.norm() * unscale;
    let start = opts.n_start.min(usable).max(1);
    for n in 1..=usable {
        let n = n as i32;
        let term = ctx.order_term(n, dphi, ladders)? + ctx.order_term(-n, dphi, ladders)?;
        sum = sum + term;
        order = n as usize;
        last = term.norm() * unscale;
        if order >= start && tail_ok(last, sum.norm() * unscale, opts) {
            break;
        }
    }
    if !tail_ok(last, sum.norm() * unscale, opts) {
        return Err(Error::Azimuthal { order, tail: last, sum: sum.norm() * unscale });
    }

    Ok(SpectralGreenSample { kz, tensor: sum * factor, frequency: s, order })
}

fn tail_ok(tail: f64, sum: f64, opts: &AzimuthalOptions) -> bool {
    tail <= opts.tail_tol * sum || tail <= opts.abs_floor
}

struct OrderContext {
    a: f64,
    rho1: f64,
    rho2: f64,
    kz: f64,
    s: Complex64,
    k2: Complex64,
    eps_m: Complex64,
    e0: Complex64,
    em: Complex64,
    e0sq: Complex64,
    emsq: Complex64,
}

impl OrderContext {
    /// Contribution of azimuthal order `n`, in scaled units.
    fn order_term(&self, n: i32, dphi: f64, lad: [&CylLadder; 4]) -> Result<Tensor3> {
        let [lm, la, l1, l2] = lad;
        let (kz, s, a) = (self.kz, self.s, self.a);
        let nf = n as f64;
        let ina = I * nf / a;

        let (jm, jmp) = (lm.j(n), lm.jp(n));
        let (j0, j0p) = (la.j(n), la.jp(n));
        let (h0, h0p) = (la.h(n), la.hp(n));
        let (im2, i02) = (1.0 / self.emsq, 1.0 / self.e0sq);

        // Unknowns (A, B, c, d): interior E_z, H_z and scattered E_z, H_z.
        let m = [
            [jm, ZERO, -h0, ZERO],
            [ZERO, jm, ZERO, -h0],
            [
                kz * ina * jm * im2,
                -s * self.em * jmp * im2,
                -kz * ina * h0 * i02,
                s * self.e0 * h0p * i02,
            ],
            [
                s * self.eps_m * self.em * jmp * im2,
                kz * ina * jm * im2,
                -s * self.e0 * h0p * i02,
                -kz * ina * h0 * i02,
            ],
        ];
        // Right-hand sides for unit incident E_z (a) and H_z (b) amplitudes.
        let rhs = [
            [j0, ZERO, kz * ina * j0 * i02, s * self.e0 * j0p * i02],
            [ZERO, j0, -s * self.e0 * j0p * i02, kz * ina * j0 * i02],
        ];
        let sol = solve4(m, rhs).ok_or_else(|| {
            Error::Domain(format!("singular boundary system at order {n}, kz = {kz}"))
        })?;
        // Reflection block: (c, d) per unit (a, b).
        let refl = [[sol[0][2], sol[1][2]], [sol[0][3], sol[1][3]]];

        // Incident amplitudes of a unit dipole along (ρ̂, φ̂, ẑ) at ρ2.
        let c0 = I / (8.0 * PI);
        let (h2, h2p) = (l2.h(n), l2.hp(n));
        let k2 = self.k2;
        let amp_e = [
            c0 * (-I * kz * self.e0 * h2p / k2),
            c0 * (-nf * kz * h2 / (k2 * self.rho2)),
            c0 * (self.e0sq * h2 / k2),
        ];
        let pref_h = I * c0 / s;
        let amp_h = [pref_h * (I * nf / self.rho2 * h2), pref_h * (self.e0 * h2p), ZERO];

        let (h1, h1p) = (l1.h(n), l1.hp(n));
        let in1 = I * nf / self.rho1;
        let phase = Complex64::from_polar(1.0, nf * dphi);
        let mut t = Tensor3::zero();
        for col in 0..3 {
            let c = refl[0][0] * amp_e[col] + refl[0][1] * amp_h[col];
            let d = refl[1][0] * amp_e[col] + refl[1][1] * amp_h[col];
            let ez = c * h1;
            let er = I * i02 * (kz * c * self.e0 * h1p + s * in1 * d * h1);
            let ep = I * i02 * (kz * in1 * c * h1 - s * d * self.e0 * h1p);
            t.0[0][col] = er * phase;
            t.0[1][col] = ep * phase;
            t.0[2][col] = ez * phase;
        }
        Ok(t)
    }
}

/// Solves `M x = b` for two right-hand sides by LU with partial pivoting,
/// after normalising the columns of `M`.
fn solve4(mut m: [[Complex64; 4]; 4], rhs: [[Complex64; 4]; 2]) -> Option<[[Complex64; 4]; 2]> {
    let mut scale = [1.0; 4];
    for (j, sc) in scale.iter_mut().enumerate() {
        let big = (0..4).map(|i| m[i][j].norm()).fold(0.0, f64::max);
        if !(big > 0.0) || !big.is_finite() {
            return None;
        }
        *sc = 1.0 / big;
        for row in m.iter_mut() {
            row[j] *= *sc;
        }
    }
    let mut b = [[ZERO; 2]; 4];
    for i in 0..4 {
        b[i] = [rhs[0][i], rhs[1][i]];
    }
    for col in 0..4 {
        let p = (col..4).max_by(|&x, &y| m[x][col].norm().total_cmp(&m[y][col].norm()))?;
        if !(m[p][col].norm() > 0.0) {
            return None;
        }
        m.swap(col, p);
        b.swap(col, p);
        let inv = 1.0 / m[col][col];
        for r in col + 1..4 {
            let f = m[r][col] * inv;
            if f == ZERO {
                continue;
            }
            for c in col..4 {
                let v = m[col][c];
                m[r][c] -= f * v;
            }
            let (b0, b1) = (b[col][0], b[col][1]);
            b[r][0] -= f * b0;
            b[r][1] -= f * b1;
        }
    }
    let mut x = [[ZERO; 4]; 2];
    for k in 0..2 {
        for i in (0..4).rev() {
            let mut acc = b[i][k];
            for j in i + 1..4 {
                acc -= m[i][j] * x[k][j];
            }
            x[k][i] = acc / m[i][i];
        }
        for j in 0..4 {
            x[k][j] *= scale[j];
        }
    }
    let finite = x.iter().flatten().all(|v| v.re.is_finite() && v.im.is_finite());
    finite.then_some(x)
}

/// Complex kz of the fundamental (n = 0, TM) surface plasmon at real ω,
/// returned as `(Re kz, Im kz)`. `None` if no bound mode is found.
pub fn plasmon_pole(geom: &WireGeometry, omega: f64) -> Result<Option<(f64, f64)>> {
    let s = SpectralPoint::Real(omega);
    let eps_m = geom.model.permittivity(s)?;
    let a = geom.radius;
    let k2 = Complex64::new(omega * omega, 0.0);

    let disp = |kz: Complex64| -> Option<(Complex64, f64)> {
        let e0 = radial_wavenumber((omega - kz) * (omega + kz));
        let em = radial_wavenumber(k2 * eps_m - kz * kz);
        let lm = CylLadder::new(em * a, 1).ok()?;
        let l0 = CylLadder::new(e0 * a, 1).ok()?;
        let (t1, t2) = (-(eps_m / em) * lm.j(1) / lm.j(0), l0.h(1) / (e0 * l0.h(0)));
        let v = t1 + t2;
        (v.re.is_finite() && v.im.is_finite()).then_some((v, t1.norm() + t2.norm()))
    };

    // Coarse logarithmic scan of |D| along the real axis above the light line.
    let lo = omega * (1.0 + 1e-6);
    let hi = (200.0 * omega).max(100.0 / a);
    let steps = 2000;
    let mut best: Option<(f64, f64)> = None;
    for i in 0..=steps {
        let kz = lo * (hi / lo).powf(i as f64 / steps as f64);
        if let Some((v, size)) = disp(Complex64::new(kz, 0.0)) {
            // Both terms fall off with kz; compare the residual to their size.
            let mag = v.norm() / size;
            if best.is_none_or(|(_, m)| mag < m) {
                best = Some((kz, mag));
            }
        }
    }
    let Some((mut_guess, _)) = best else { return Ok(None) };

    let mut kz = Complex64::new(mut_guess, 0.0);
    for _ in 0..100 {
        let Some((f, _)) = disp(kz) else { return Ok(None) };
        let h = 1e-7 * kz.norm();
        let Some((fp, _)) = disp(kz + h) else { return Ok(None) };
        let Some((fm, _)) = disp(kz - h) else { return Ok(None) };
        let df = (fp - fm) / (2.0 * h);
        let step = f / df;
        kz -= step;
        if step.norm() < 1e-13 * kz.norm() {
            break;
        }
    }
    let Some((f, size)) = disp(kz) else { return Ok(None) };
    let residual_ok = f.norm() < 1e-8 * size;
    if kz.re > omega && kz.im >= 0.0 && kz.im < kz.re && residual_ok {
        Ok(Some((kz.re, kz.im)))
    } else {
        Ok(None)
    }
}

/// Fields decaying as `e^{-kz·gap}` are dropped beyond this `kz·gap`.
const POLE_GAP_CUTOFF: f64 = 40.0;

/// The plasmon pole as a mesh hint, unless its field at the points is
/// negligible.
pub(crate) fn pole_hint(geom: &WireGeometry, omega: f64, gap: f64) -> Result<Option<PoleHint>> {
    Ok(plasmon_pole(geom, omega)?
        .filter(|(center, _)| center * gap <= POLE_GAP_CUTOFF)
        .map(|(center, width)| PoleHint { center, width }))
}

/// Radial distance scale of the near-field decay, `ρ1 + ρ2 − 2a`.
pub(crate) fn gap(geom: &WireGeometry, rho1: f64, rho2: f64) -> f64 {
    rho1 + rho2 - 2.0 * geom.radius
}

/// Azimuthal options with an absolute floor pinned to the integrand scale.
pub(crate) fn floored_options(
    geom: &WireGeometry,
    rho1: f64,
    rho2: f64,
    dphi: f64,
    s: SpectralPoint,
    base: &AzimuthalOptions,
) -> Result<AzimuthalOptions> {
    // The near-field part peaks around kz ~ 1/gap; the light line sets the
    // other natural scale.
    let mut scale: f64 = 0.0;
    for kz in [0.5 / gap(geom, rho1, rho2), 2.0 * s.modulus() + 1.0] {
        let v = wire_spectral_green_with(geom, rho1, rho2, dphi, s, kz, &AzimuthalOptions {
            abs_floor: f64::INFINITY,
            ..*base
        })?;
        scale = scale.max(v.tensor.norm());
    }
    Ok(AzimuthalOptions { abs_floor: base.tail_tol * scale, ..*base })
}

/// Relative half-width of the window around the light line `kz = ω` inside
/// which the integrand is frozen at the window edge. Closer in, the boundary
/// solve cancels as `|kz − ω|^-3` while the exact integrand is only
/// logarithmic there, so freezing costs about `1e-6 ω |G̃|`.
pub const LIGHT_LINE_GUARD: f64 = 1e-6;

/// Evaluates the spectral integrand, keeping kz off the branch points.
pub(crate) fn spectral_green_nudged(
    geom: &WireGeometry,
    rho1: f64,
    rho2: f64,
    dphi: f64,
    s: SpectralPoint,
    kz: f64,
    opts: &AzimuthalOptions,
) -> Result<Tensor3> {
    let mut kz = kz;
    if let SpectralPoint::Real(w) = s {
        let (w, guard) = (w.abs(), LIGHT_LINE_GUARD * w.abs());
        let d = kz.abs() - w;
        if d.abs() < guard {
            let side = if d < 0.0 { -1.0 } else { 1.0 };
            kz = kz.signum() * (w + side * guard);
        }
    }
    match wire_spectral_green_with(geom, rho1, rho2, dphi, s, kz, opts) {
        Err(Error::Branch { .. }) => {
            wire_spectral_green_with(geom, rho1, rho2, dphi, s, kz + 1e-12, opts).map(|v| v.tensor)
        }
        other => other.map(|v| v.tensor),
    }
}

/// `G^med(r1, r2, s)` in the cylindrical frames of the two points.
///
/// The kz spectrum is tabulated once and Fourier transformed, so `tol` is
/// relative to `∫|G̃| dkz`; strongly cancelling transforms (large Δz, or
/// imaginary frequencies) carry that absolute error.
pub fn wire_green(
    geom: &WireGeometry,
    r1: CylPoint,
    r2: CylPoint,
    s: SpectralPoint,
    tol: f64,
) -> Result<(DyadicGreen, QuadratureReport)> {
    wire_green_with(geom, r1, r2, s, tol, &AzimuthalOptions::default())
}

pub fn wire_green_with(
    geom: &WireGeometry,
    r1: CylPoint,
    r2: CylPoint,
    s: SpectralPoint,
    tol: f64,
    azimuthal: &AzimuthalOptions,
) -> Result<(DyadicGreen, QuadratureReport)> {
    let dphi = r1.phi - r2.phi;
    let dz = r1.z - r2.z;
    let (rho1, rho2) = (r1.rho, r2.rho);
    let pole = match s {
        SpectralPoint::Real(w) => {
            if geom.model.gamma_p == 0.0 {
                return Err(Error::Domain(
                    "lossless metal puts the plasmon pole on the real kz axis".into(),
                ));
            }
            pole_hint(geom, w, gap(geom, rho1, rho2))?
        }
        SpectralPoint::Imaginary(_) => None,
    };
    let opts = floored_options(geom, rho1, rho2, dphi, s, azimuthal)?;
    let mut singular = Vec::new();
    if let SpectralPoint::Real(w) = s {
        singular.push(w.abs());
    }
    let mut table_opts = TableOptions { pole, decay_length: gap(geom, rho1, rho2), ..TableOptions::new(tol) };
    table_opts.singular_points = singular;

    let integrand = |kz: f64| -> Result<Vec<Complex64>> {
        let t = spectral_green_nudged(geom, rho1, rho2, dphi, s, kz, &opts)?;
        Ok(t.0.iter().flatten().copied().collect())
    };
    let table = KzTable::build(integrand, 9, &table_opts)?;
    let parity: Vec<KzParity> =
        EVEN_IN_KZ.iter().map(|&e| if e { KzParity::Even } else { KzParity::Odd }).collect();
    let values = table.fourier(&[dz], &parity).remove(0);
    let mut value = Tensor3::zero();
    for (idx, v) in values.iter().enumerate() {
        value.0[idx / 3][idx % 3] = *v;
    }
    // Folding doubles the half-line interpolation error.
    let error = 2.0 * table.l1_error.iter().cloned().fold(0.0, f64::max);
    let scale = 2.0 * table.l1_norm.iter().cloned().fold(0.0, f64::max);
    if !table.converged {
        return Err(Error::Quadrature { nodes: table.nodes_used, error, target: tol * scale });
    }
    let summary = QuadratureReport {
        value: value.0[0][0],
        abs_error_estimate: error,
        nodes_used: table.nodes_used,
        converged: true,
    };
    let frame = Frame::Cylindrical { phi1: r1.phi, phi2: r2.phi };
    Ok((DyadicGreen { value, frame }, summary))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn default_wire() -> WireGeometry {
        WireGeometry::new(0.01, DrudeModel::default_for(2.0 * PI)).unwrap()
    }

    #[test]
    fn kz_parity_of_components() {
        let g = default_wire();
        let s = SpectralPoint::Real(2.0 * PI);
        for kz in [3.0, 30.9, 120.0] {
            let p = wire_spectral_green(&g, 0.015, 0.018, 0.4, s, kz).unwrap().tensor;
            let m = wire_spectral_green(&g, 0.015, 0.018, 0.4, s, -kz).unwrap().tensor;
            for idx in 0..9 {
                let (x, y) = (p.0[idx / 3][idx % 3], m.0[idx / 3][idx % 3]);
                let expect = if EVEN_IN_KZ[idx] { y } else { -y };
                assert!((x - expect).norm() <= 1e-12 * p.norm(), "component {idx} at kz {kz}");
            }
        }
    }

    #[test]
    fn reciprocity_of_the_integrand() {
        let g = default_wire();
        let s = SpectralPoint::Real(2.0 * PI);
        let f = wire_spectral_green(&g, 0.015, 0.021, 0.7, s, 17.0).unwrap().tensor;
        let b = wire_spectral_green(&g, 0.021, 0.015, -0.7, s, -17.0).unwrap().tensor;
        assert!((f - b.transpose()).norm() <= 1e-10 * f.norm());
    }

    #[test]
    fn branch_point_is_reported() {
        let g = default_wire();
        let w = 2.0 * PI;
        let r = wire_spectral_green(&g, 0.015, 0.015, 0.0, SpectralPoint::Real(w), w);
        assert!(matches!(r, Err(Error::Branch { .. })));
    }

    #[test]
    fn points_inside_the_wire_rejected() {
        let g = default_wire();
        let r = wire_spectral_green(&g, 0.005, 0.015, 0.0, SpectralPoint::Real(1.0), 3.0);
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn pole_lies_under_the_plasmon_peak() {
        let g = default_wire();
        let w = 2.0 * PI;
        let (kp, width) = plasmon_pole(&g, w).unwrap().unwrap();
        assert!(kp > w);
        assert!(width > 0.0 && width < 0.2 * kp);
        let s = SpectralPoint::Real(w);
        let at = |k: f64| wire_spectral_green(&g, 0.015, 0.015, 0.0, s, k).unwrap().tensor.0[0][0].im;
        let peak = at(kp);
        assert!(peak > at(kp - 5.0 * width) && peak > at(kp + 5.0 * width));
    }

    #[test]
    fn solver_handles_permuted_identity() {
        let one = Complex64::new(1.0, 0.0);
        let mut m = [[ZERO; 4]; 4];
        m[0][1] = one;
        m[1][0] = one;
        m[2][3] = 2.0 * one;
        m[3][2] = one;
        let x = solve4(m, [[one, 2.0 * one, 3.0 * one, 4.0 * one], [one; 4]]).unwrap();
        assert_eq!(x[0], [2.0 * one, one, 4.0 * one, 1.5 * one]);
    }
}
