//! Frequency- and wavenumber-domain quadrature.
//!
//! * [`kz_integrate`]: adaptive integral over the longitudinal wavenumber,
//!   with pole-aware meshing and an accelerated oscillatory tail.
//! * [`imag_axis_integrate`]: `∫₀^∞ κ² g(κ) ω_A/(κ²+ω_A²) dκ`.
//! * [`pv_shift_oracle`]: brute-force principal value on the real axis.
//! * [`kk_check`]: numerical Kramers-Kronig consistency.

mod adaptive;
pub mod models;
pub mod rules;
mod table;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use adaptive::{clenshaw, wynn_epsilon, Rule, Tolerance};
pub(crate) use adaptive::Mesh;
pub use table::{KzParity, KzTable, TableOptions};

use crate::error::{Error, Result};
use crate::material::SpectralPoint;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Default node budget of a single adaptive integral.
pub const NODE_BUDGET: usize = 20_000;

/// Outcome of one adaptive integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureReport {
    pub value: Complex64,
    pub abs_error_estimate: f64,
    pub nodes_used: usize,
    pub converged: bool,
}

/// Outcome of a vector-valued adaptive integral.
#[derive(Debug, Clone, PartialEq)]
pub struct VecReport {
    pub values: Vec<Complex64>,
    pub errors: Vec<f64>,
    pub nodes_used: usize,
    pub converged: bool,
}

impl VecReport {
    /// Collapses to a scalar report: first component, worst error.
    pub fn summary(&self) -> QuadratureReport {
        QuadratureReport {
            value: self.values.first().copied().unwrap_or(ZERO),
            abs_error_estimate: self.errors.iter().cloned().fold(0.0, f64::max),
            nodes_used: self.nodes_used,
            converged: self.converged,
        }
    }
}

/// Location and half-width of a resonance on the integration axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoleHint {
    pub center: f64,
    pub width: f64,
}

/// What the half-line integral stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KzSymmetry {
    /// `∫₀^∞ f`.
    HalfLine,
    /// `∫_{-∞}^{∞} f` for an even `f`, i.e. `2∫₀^∞ f`.
    Even,
}

/// Controls for [`kz_integrate_vec`].
#[derive(Debug, Clone, PartialEq)]
pub struct KzOptions {
    pub tol: f64,
    pub floor: f64,
    pub pole: Option<PoleHint>,
    /// Points where the integrand is not smooth (light lines).
    pub singular_points: Vec<f64>,
    /// Length over which the integrand decays as `e^{-kz·L}`; zero if unknown.
    pub decay_length: f64,
    /// Angular frequency of a `cos/sin(kz·Δz)` factor in the integrand.
    pub oscillation: f64,
    pub symmetry: KzSymmetry,
    pub node_budget: usize,
}

impl KzOptions {
    pub fn new(tol: f64) -> Self {
        Self {
            tol,
            floor: 1.0,
            pole: None,
            singular_points: Vec::new(),
            decay_length: 0.0,
            oscillation: 0.0,
            symmetry: KzSymmetry::HalfLine,
            node_budget: NODE_BUDGET,
        }
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol >= 1e-12 && tol < 1.0) {
        return Err(Error::Config(format!("tolerance {tol:e} outside [1e-12, 1)")));
    }
    Ok(())
}

/// Breakpoints on `[0, extent]` from the singular points and pole hint.
pub(crate) fn kz_breakpoints(
    singular: &[f64],
    pole: Option<PoleHint>,
    decay_length: f64,
) -> (Vec<f64>, f64) {
    let mut pts = vec![0.0];
    let mut extent: f64 = 1.0;
    for &s in singular {
        if s > 0.0 {
            pts.push(s);
            extent = extent.max(2.0 * s);
        }
    }
    if let Some(p) = pole {
        if p.center > 0.0 && p.width > 0.0 {
            let mut w = p.width;
            while w < p.center {
                pts.push(p.center - w);
                pts.push(p.center + w);
                w *= 2.0;
            }
            pts.push(p.center);
            extent = extent.max(p.center + 64.0 * p.width).max(2.0 * p.center);
        }
    }
    if decay_length > 0.0 {
        extent = extent.max(1.0 / decay_length);
    }
    pts.retain(|x| *x >= 0.0 && *x < extent);
    pts.push(extent);
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs().max(1.0));
    (pts, extent)
}

/// Adaptive `∫₀^∞` of a scalar integrand.
pub fn kz_integrate<F>(
    integrand: F,
    symmetry: KzSymmetry,
    pole_hint: Option<PoleHint>,
    tol: f64,
) -> Result<QuadratureReport>
where
    F: Fn(f64) -> Complex64 + Sync,
{
    let opts = KzOptions { pole: pole_hint, symmetry, ..KzOptions::new(tol) };
    let f = |k: f64| Ok(vec![integrand(k)]);
    Ok(kz_integrate_vec(f, 1, &opts)?.summary())
}

/// Adaptive `∫₀^∞` of a vector integrand.
///
/// The finite part is meshed around the singular points and the pole hint
/// and refined to tolerance. The tail is added in doubling panels until they
/// are negligible; if the integrand oscillates, the tail switches to
/// half-period panels summed with Wynn's epsilon acceleration.
pub fn kz_integrate_vec<F>(f: F, dim: usize, opts: &KzOptions) -> Result<VecReport>
where
    F: Fn(f64) -> Result<Vec<Complex64>> + Sync,
{
    check_tol(opts.tol)?;
    let (pts, extent) = kz_breakpoints(&opts.singular_points, opts.pole, opts.decay_length);
    let tol = Tolerance { rel: opts.tol, floor: opts.floor, abs: 0.0 };

    let mut mesh = Mesh::new(&f, dim, Rule::Kronrod, opts.node_budget);
    let intervals: Vec<(f64, f64)> = pts.windows(2).map(|w| (w[0], w[1])).collect();
    mesh.extend(&intervals)?;
    let mut converged = mesh.refine(&tol)?;

    // Doubling tail.
    let mut k = extent;
    let mut quiet = 0;
    let mut tail_values = vec![ZERO; dim];
    let mut tail_errors = vec![0.0; dim];
    let half_period = if opts.oscillation > 0.0 { PI / opts.oscillation } else { f64::INFINITY };
    loop {
        let width = k;
        if width > 16.0 * half_period {
            break;
        }
        let (core, _) = mesh.totals();
        let scale: Vec<f64> =
            core.iter().zip(&tail_values).map(|(a, b)| (a + b).norm()).collect();
        let allowed = tol.allowed(&scale);
        let piece = sub_integral(&f, dim, k, k + width, &tol, &allowed, &mut mesh)?;
        converged &= piece.converged;
        let small = piece
            .values
            .iter()
            .zip(&allowed)
            .all(|(v, a)| v.norm() <= 0.1 * a);
        for i in 0..dim {
            tail_values[i] += piece.values[i];
            tail_errors[i] += piece.errors[i];
        }
        k += width;
        quiet = if small { quiet + 1 } else { 0 };
        if quiet >= 2 {
            break;
        }
        if mesh.remaining() == 0 || !k.is_finite() {
            converged = false;
            break;
        }
    }

    if quiet < 2 && opts.oscillation > 0.0 && mesh.remaining() > 0 {
        // Oscillatory tail: half-period pieces and epsilon extrapolation.
        let (sum, err, ok) = oscillatory_tail(dim, k, half_period, &tol, &mut mesh, &tail_values)?;
        converged &= ok;
        for i in 0..dim {
            tail_values[i] += sum[i];
            tail_errors[i] += err[i];
        }
    }

    // The core was refined against its own size; a cancelling tail can
    // leave the total smaller, so tighten to the final allowance.
    let (core, _) = mesh.totals();
    let total: Vec<f64> = core.iter().zip(&tail_values).map(|(a, b)| (a + b).norm()).collect();
    let budget: Vec<f64> = tol
        .allowed(&total)
        .iter()
        .zip(&tail_errors)
        .map(|(a, t)| (a - t).max(0.5 * a))
        .collect();
    converged &= mesh.refine_with(|_| budget.clone())?;

    let (core, core_err) = mesh.totals();
    let factor = match opts.symmetry {
        KzSymmetry::HalfLine => 1.0,
        KzSymmetry::Even => 2.0,
    };
    let values: Vec<Complex64> =
        core.iter().zip(&tail_values).map(|(a, b)| (a + b) * factor).collect();
    let errors: Vec<f64> =
        core_err.iter().zip(&tail_errors).map(|(a, b)| (a + b) * factor).collect();
    let allowed = tol.allowed(&values.iter().map(|v| v.norm()).collect::<Vec<_>>());
    let converged = converged && errors.iter().zip(&allowed).all(|(e, a)| e <= a);
    Ok(VecReport { values, errors, nodes_used: mesh.nodes_used, converged })
}

/// Integrates `[a, b]` in a fresh mesh, charging its nodes to `parent`.
fn sub_integral<F>(
    f: &F,
    dim: usize,
    a: f64,
    b: f64,
    tol: &Tolerance,
    allowed: &[f64],
    parent: &mut Mesh<'_, F>,
) -> Result<VecReport>
where
    F: Fn(f64) -> Result<Vec<Complex64>> + Sync,
{
    let mut sub = Mesh::new(f, dim, Rule::Kronrod, parent.remaining());
    sub.extend(&[(a, b)])?;
    // Absolute target inherited from the running total.
    let abs = 0.1 * allowed.iter().cloned().fold(f64::INFINITY, f64::min);
    let local = Tolerance { rel: tol.rel, floor: tol.floor, abs: if abs.is_finite() { abs } else { 0.0 } };
    let ok = sub.refine(&local)?;
    parent.nodes_used += sub.nodes_used;
    let (values, errors) = sub.totals();
    Ok(VecReport { values, errors, nodes_used: sub.nodes_used, converged: ok })
}

fn oscillatory_tail<F>(
    dim: usize,
    start: f64,
    half_period: f64,
    tol: &Tolerance,
    parent: &mut Mesh<'_, F>,
    earlier_tail: &[Complex64],
) -> Result<(Vec<Complex64>, Vec<f64>, bool)>
where
    F: Fn(f64) -> Result<Vec<Complex64>> + Sync,
{
    const MAX_TERMS: usize = 4000;
    const CHUNK: usize = 8;
    let mut partial: Vec<Vec<Complex64>> = vec![Vec::new(); dim];
    let mut running = vec![ZERO; dim];
    let mut raw_err = vec![0.0; dim];
    let mut a = start;
    let mut terms = 0;
    loop {
        // Evaluate a chunk of half periods in one parallel batch.
        let intervals: Vec<(f64, f64)> = (0..CHUNK)
            .map(|j| (a + j as f64 * half_period, a + (j + 1) as f64 * half_period))
            .collect();
        if parent.remaining() < intervals.len() * 21 {
            return Ok((running, raw_err.iter().map(|e| e + f64::INFINITY).collect(), false));
        }
        let panels = parent.evaluate(&intervals)?;
        a += CHUNK as f64 * half_period;
        terms += CHUNK;
        let mut last_term = vec![0.0; dim];
        for p in &panels {
            for i in 0..dim {
                running[i] += p.integral[i];
                raw_err[i] += p.error[i];
                partial[i].push(running[i]);
                last_term[i] = p.integral[i].norm();
            }
        }
        let (core, _) = parent.totals();
        let scale: Vec<f64> = (0..dim).map(|i| (core[i] + earlier_tail[i] + running[i]).norm()).collect();
        let allowed = tol.allowed(&scale);

        // Negligible raw terms: the partial sum itself has converged.
        if last_term.iter().zip(&allowed).all(|(t, a)| *t <= 0.01 * a) {
            return Ok((running, raw_err, true));
        }
        let mut extrapolated = vec![ZERO; dim];
        let mut spread = vec![0.0; dim];
        let mut ready = true;
        for i in 0..dim {
            // Only the most recent part of the sequence feeds the table.
            let seq = &partial[i][partial[i].len().saturating_sub(24)..];
            match wynn_epsilon(seq) {
                Some((best, second)) => {
                    extrapolated[i] = best;
                    spread[i] = (best - second).norm();
                }
                None => ready = false,
            }
        }
        if ready && spread.iter().zip(&allowed).all(|(s, a)| *s <= 0.1 * a) {
            let err: Vec<f64> = raw_err.iter().zip(&spread).map(|(r, s)| r + s).collect();
            return Ok((extrapolated, err, true));
        }
        if terms >= MAX_TERMS {
            let err: Vec<f64> = raw_err.iter().zip(&spread).map(|(r, s)| r + s).collect();
            return Ok((extrapolated, err, false));
        }
    }
}

/// `∫₀^∞ κ² g(κ) ω_A/(κ²+ω_A²) dκ` for a real integrand `g`.
pub fn imag_axis_integrate<G>(g: G, omega_a: f64, tol: f64) -> Result<QuadratureReport>
where
    G: Fn(f64) -> f64 + Sync,
{
    let gv = |k: f64| Ok(vec![g(k)]);
    let opts = ImagAxisOptions::new(tol);
    let r = imag_axis_integrate_vec(gv, 1, omega_a, &opts)?;
    Ok(r.summary())
}

/// Controls for [`imag_axis_integrate_vec`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImagAxisOptions {
    pub tol: f64,
    pub floor: f64,
    /// Absolute error allowance added to the relative one.
    pub abs: f64,
    pub node_budget: usize,
}

impl ImagAxisOptions {
    pub fn new(tol: f64) -> Self {
        Self { tol, floor: 1.0, abs: 0.0, node_budget: NODE_BUDGET }
    }
}

/// Vector form of [`imag_axis_integrate`]; `g` returns one real value per
/// component. Uses `κ = ω_A t/(1−t)` on `t ∈ [0, 1)`, graded towards the
/// static end and the far tail.
pub fn imag_axis_integrate_vec<G>(
    g: G,
    dim: usize,
    omega_a: f64,
    opts: &ImagAxisOptions,
) -> Result<VecReport>
where
    G: Fn(f64) -> Result<Vec<f64>> + Sync,
{
    check_tol(opts.tol)?;
    if !(omega_a > 0.0) {
        return Err(Error::Domain(format!("ω_A must be positive, got {omega_a}")));
    }
    let mapped = |t: f64| -> Result<Vec<Complex64>> {
        let u = 1.0 - t;
        let kappa = omega_a * t / u;
        let jac = omega_a / (u * u);
        let w = kappa * kappa * omega_a / (kappa * kappa + omega_a * omega_a) * jac;
        if w == 0.0 || !kappa.is_finite() {
            return Ok(vec![ZERO; dim]);
        }
        Ok(g(kappa)?.into_iter().map(|v| Complex64::new(v * w, 0.0)).collect())
    };
    let breaks = [
        0.0, 1e-4, 1e-3, 1e-2, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99,
        0.999, 1.0,
    ];
    let intervals: Vec<(f64, f64)> = breaks.windows(2).map(|w| (w[0], w[1])).collect();
    let tol = Tolerance { rel: opts.tol, floor: opts.floor, abs: opts.abs };
    let mut mesh = Mesh::new(&mapped, dim, Rule::Kronrod, opts.node_budget);
    mesh.extend(&intervals)?;
    let converged = mesh.refine(&tol)?;
    let (values, errors) = mesh.totals();
    Ok(VecReport { values, errors, nodes_used: mesh.nodes_used, converged })
}

/// A narrow feature of an integrand on the real frequency axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Feature {
    pub center: f64,
    pub width: f64,
}

/// Controls for the principal-value integrals.
#[derive(Debug, Clone, PartialEq)]
pub struct PvOptions {
    pub tol: f64,
    /// Upper integration limit; `None` for infinity.
    pub upper: Option<f64>,
    pub features: Vec<Feature>,
    pub node_budget: usize,
}

impl PvOptions {
    pub fn new(tol: f64) -> Self {
        Self { tol, upper: None, features: Vec::new(), node_budget: 4 * NODE_BUDGET }
    }
}

/// Result of a principal-value evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PvReport {
    pub value: f64,
    /// Largest disagreement between the window sizes.
    pub spread: f64,
    pub abs_error_estimate: f64,
    pub nodes_used: usize,
}

/// `PV ∫₀^U f(ω)/(ω − ω_A) dω` by symmetric window subtraction.
///
/// With `h0 = ω_A/2`,
/// `PV = ∫_{[0,U]∖(ω_A−h0, ω_A+h0)} f/(ω−ω_A) + ∫₀^{h0} [f(ω_A+u) − f(ω_A−u)]/u du`.
/// The outer part is integrated once. The window part is integrated for
/// inner windows `h = h0, h0/2, h0/4` (split at `h`) and the three values
/// are Richardson extrapolated, so any quadrature inconsistency near the
/// pole shows up as a spread.
pub fn pv_integral<F>(f: F, omega_a: f64, opts: &PvOptions) -> Result<PvReport>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    check_tol(opts.tol)?;
    if !(omega_a > 0.0) {
        return Err(Error::Domain(format!("pole must be positive, got {omega_a}")));
    }
    if let Some(u) = opts.upper {
        if !(u > 2.0 * omega_a) {
            return Err(Error::Domain(format!("upper limit {u} must exceed 2ω_A")));
        }
    }
    let h0 = 0.5 * omega_a;
    let (outer, outer_err, mut nodes) = pv_outer(&f, omega_a, h0, opts)?;
    let mut estimates = Vec::new();
    let mut err_total = outer_err;
    for level in 0..3 {
        let h = h0 / f64::powi(2.0, level);
        let (v, e, n) = pv_window(&f, omega_a, h0, h, opts)?;
        estimates.push(outer + v);
        err_total = err_total.max(outer_err + e);
        nodes += n;
    }
    // The exact value is h-independent; fit `v(h) = v0 + c h²` to the two
    // smallest windows as the extrapolated estimate.
    let (v1, v2) = (estimates[1], estimates[2]);
    let value = (4.0 * v2 - v1) / 3.0;
    let spread = estimates
        .iter()
        .map(|v| (v - value).abs())
        .fold(0.0, f64::max);
    let scale = value.abs().max(err_total);
    if spread > 10.0 * opts.tol * scale + 1e3 * err_total && spread > 0.0 {
        return Err(Error::Extrapolation { spread, tol: opts.tol * scale });
    }
    Ok(PvReport { value, spread, abs_error_estimate: err_total + spread, nodes_used: nodes })
}

fn refine_single<G>(g: &G, breaks: &mut Vec<f64>, opts: &PvOptions) -> Result<(f64, f64, usize)>
where
    G: Fn(f64) -> Result<Vec<Complex64>> + Sync,
{
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let intervals: Vec<(f64, f64)> = breaks.windows(2).map(|w| (w[0], w[1])).collect();
    let mut mesh = Mesh::new(g, 1, Rule::Kronrod, opts.node_budget);
    mesh.extend(&intervals)?;
    let ok = mesh.refine(&Tolerance::relative(0.1 * opts.tol))?;
    let (v, e) = mesh.totals();
    if !ok {
        return Err(Error::Quadrature {
            nodes: mesh.nodes_used,
            error: e[0],
            target: 0.1 * opts.tol * v[0].norm(),
        });
    }
    Ok((v[0].re, e[0], mesh.nodes_used))
}

/// `∫ f/(ω − ω_A)` over `[0, ω_A − h0] ∪ [ω_A + h0, U]`.
fn pv_outer<F>(f: &F, omega_a: f64, h0: f64, opts: &PvOptions) -> Result<(f64, f64, usize)>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    // One parameter s for all pieces, so a single mesh refines them together:
    //   s ∈ [1, 2): left,     ω = (ω_A − h0)(s − 1)
    //   s ∈ [2, 3): right,    ω up to U (or 4ω_A)
    //   s ∈ [3, 4): far tail, ω = R/(4 − s)   (infinite U only)
    let right_end = opts.upper.unwrap_or(4.0 * omega_a);
    let (lo, hi) = (omega_a - h0, omega_a + h0);
    let g = |s: f64| -> Result<Vec<Complex64>> {
        let v = if s < 2.0 {
            let w = lo * (s - 1.0);
            f(w)? / (w - omega_a) * lo
        } else if s < 3.0 {
            let w = hi + (right_end - hi) * (s - 2.0);
            f(w)? / (w - omega_a) * (right_end - hi)
        } else {
            let t = 4.0 - s;
            let w = right_end / t;
            f(w)? / (w - omega_a) * right_end / (t * t)
        };
        Ok(vec![Complex64::new(v, 0.0)])
    };
    let map_w = |w: f64| -> Option<f64> {
        if w <= 0.0 {
            None
        } else if w < lo {
            Some(1.0 + w / lo)
        } else if w > hi && w < right_end {
            Some(2.0 + (w - hi) / (right_end - hi))
        } else if w >= right_end && opts.upper.is_none() {
            Some(4.0 - right_end / w)
        } else {
            None
        }
    };
    let mut breaks = vec![1.0, 1.5, 2.0, 3.0];
    // Octaves of ω_A keep long upper limits from starving the low end.
    let mut w = 2.0 * omega_a;
    while w < right_end {
        breaks.extend(map_w(w));
        w *= 2.0;
    }
    for feat in &opts.features {
        for m in [0.0, -0.5, 0.5, -2.0, 2.0, -8.0, 8.0, -32.0, 32.0] {
            breaks.extend(map_w(feat.center + m * feat.width));
        }
    }
    if opts.upper.is_none() {
        breaks.extend([3.25, 3.5, 3.75, 3.9, 3.99, 4.0]);
    }
    refine_single(&g, &mut breaks, opts)
}

/// `∫₀^{h0} [f(ω_A+u) − f(ω_A−u)]/u du`, with a breakpoint at `h`.
fn pv_window<F>(f: &F, omega_a: f64, h0: f64, h: f64, opts: &PvOptions) -> Result<(f64, f64, usize)>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let g = |u: f64| -> Result<Vec<Complex64>> {
        Ok(vec![Complex64::new((f(omega_a + u)? - f(omega_a - u)?) / u, 0.0)])
    };
    let mut breaks = vec![0.0, 0.25 * h, 0.5 * h, h, h0];
    for feat in &opts.features {
        let u = (feat.center - omega_a).abs();
        for m in [0.0, -2.0, 2.0, -8.0, 8.0] {
            let v = u + m * feat.width;
            if v > 0.0 && v < h0 {
                breaks.push(v);
            }
        }
    }
    refine_single(&g, &mut breaks, opts)
}

/// `PV ∫₀^∞ ω² Im G(ω)/(ω − ω_A) dω` (c = 1), the real-axis form of the shift.
pub fn pv_shift_oracle<F>(im_g: F, omega_a: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64 + Sync,
{
    pv_shift_oracle_with(|w| Ok(im_g(w)), omega_a, &PvOptions::new(tol)).map(|r| r.value)
}

pub fn pv_shift_oracle_with<F>(im_g: F, omega_a: f64, opts: &PvOptions) -> Result<PvReport>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    pv_integral(|w| Ok(w * w * im_g(w)?), omega_a, opts)
}

/// Which Kramers-Kronig pair to test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KkForm {
    /// `Re G(ω_A) = (2/π) PV ∫₀^∞ ω Im G/(ω² − ω_A²)`.
    Standard,
    /// `ω_A² Re G(ω_A) = (2/π) PV ∫₀^∞ ω² · ω Im G/(ω² − ω_A²)`; needs `ω²G → 0`.
    Weighted,
}

/// Real-frequency range and sampling controls for [`kk_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    pub omega_max: f64,
    pub tol: f64,
    pub features: Vec<Feature>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum KkOutcome {
    Checked {
        lhs: f64,
        rhs: f64,
        residual: f64,
        /// Estimated contribution of `ω > omega_max`.
        tail_estimate: f64,
        /// The tail estimate exceeds the residual, so the grid is too short.
        truncation_warning: bool,
    },
    /// `Im G` vanished on the grid; nothing to compare.
    Skipped { lhs: f64 },
}

impl KkOutcome {
    pub fn residual(&self) -> Option<f64> {
        match self {
            KkOutcome::Checked { residual, .. } => Some(*residual),
            KkOutcome::Skipped { .. } => None,
        }
    }
}

/// Compares `Re G(ω_A)` with the dispersion integral of `Im G` over
/// `[0, omega_max]`; returns `|LHS − RHS|/|LHS|`.
pub fn kk_check<G>(g: G, omega_a: f64, form: KkForm, grid: &FrequencyGrid) -> Result<KkOutcome>
where
    G: Fn(SpectralPoint) -> Result<Complex64> + Sync,
{
    if !(grid.omega_max >= 20.0 * omega_a) {
        return Err(Error::Config(format!(
            "KK grid must reach 20 ω_A, got {}",
            grid.omega_max
        )));
    }
    let weight = |w: f64| match form {
        KkForm::Standard => 1.0,
        KkForm::Weighted => w * w,
    };
    let lhs = weight(omega_a) * g(SpectralPoint::Real(omega_a))?.re;
    // Integrand of the PV over 1/(ω − ω_A): (2/π) w(ω) ω Im G / (ω + ω_A).
    let seen_nonzero = std::sync::atomic::AtomicBool::new(false);
    let h = |w: f64| -> Result<f64> {
        let im = g(SpectralPoint::Real(w))?.im;
        if im != 0.0 {
            seen_nonzero.store(true, std::sync::atomic::Ordering::Relaxed);
        }
        Ok(2.0 / PI * weight(w) * w * im / (w + omega_a))
    };
    let opts = PvOptions {
        tol: grid.tol,
        upper: Some(grid.omega_max),
        features: grid.features.clone(),
        node_budget: 4 * NODE_BUDGET,
    };
    let report = pv_integral(h, omega_a, &opts)?;
    if !seen_nonzero.load(std::sync::atomic::Ordering::Relaxed) {
        return Ok(KkOutcome::Skipped { lhs });
    }
    let rhs = report.value;
    // Power-law tail from the last octave of the grid.
    let top = grid.omega_max;
    let f1 = h(top)? / (top - omega_a);
    let f0 = h(0.5 * top)? / (0.5 * top - omega_a);
    let tail_estimate = if f1 != 0.0 && f0 != 0.0 && f1.signum() == f0.signum() {
        let p = (f0 / f1).abs().log2();
        if p > 1.0 {
            (f1 * top / (p - 1.0)).abs()
        } else {
            f64::INFINITY
        }
    } else {
        f1.abs() * top
    };
    let residual = (lhs - rhs).abs() / lhs.abs();
    let truncation_warning = tail_estimate > (lhs - rhs).abs();
    if truncation_warning {
        log::warn!("KK residual {residual:e} is dominated by grid truncation (tail {tail_estimate:e})");
    }
    Ok(KkOutcome::Checked { lhs, rhs, residual, tail_estimate, truncation_warning })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_half_line() {
        let r = kz_integrate(|k| Complex64::new((-k * k).exp(), 0.0), KzSymmetry::HalfLine, None, 1e-12)
            .unwrap();
        assert!(r.converged);
        assert!((r.value.re - PI.sqrt() / 2.0).abs() < 1e-10);
    }

    #[test]
    fn zero_integrand() {
        let r = kz_integrate(|_| ZERO, KzSymmetry::Even, None, 1e-8).unwrap();
        assert!(r.converged);
        assert_eq!(r.value, ZERO);
    }

    #[test]
    fn imag_axis_closed_form() {
        let w = 2.0 * PI;
        let r = imag_axis_integrate(|k| 1.0 / (k * k + w * w), w, 1e-12).unwrap();
        assert!(r.converged);
        assert!((r.value.re - PI / 4.0).abs() < 1e-10);
        let z = imag_axis_integrate(|_| 0.0, w, 1e-8).unwrap();
        assert_eq!(z.value.re, 0.0);
    }

    #[test]
    fn tolerance_bounds_enforced() {
        assert!(kz_integrate(|_| ZERO, KzSymmetry::Even, None, 1e-14).is_err());
    }
}
