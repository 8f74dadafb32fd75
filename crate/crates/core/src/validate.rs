//! Built-in self-checks of the numerical machinery.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::OMEGA_A;
use crate::error::Result;
use crate::gvac::{free_space_rate, green_vacuum_im_coincident, im_coincident_limit, CylPoint};
use crate::gwire::{wire_green, WireGeometry};
use crate::material::SpectralPoint;
use crate::specfun::bessel_jh;
use crate::spectral::models::{contour_shift, model_pv_shift, CausalModel, Lorentz};
use crate::spectral::{kk_check, Feature, FrequencyGrid, KkForm, KkOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub name: String,
    pub status: Status,
    pub residual: Option<f64>,
    pub tolerance: f64,
    pub detail: String,
}

impl SuiteResult {
    fn judged(name: &str, residual: f64, tolerance: f64, detail: String) -> Self {
        let status = if residual <= tolerance { Status::Pass } else { Status::Fail };
        Self { name: name.into(), status, residual: Some(residual), tolerance, detail }
    }

    fn failed(name: &str, tolerance: f64, detail: String) -> Self {
        Self { name: name.into(), status: Status::Fail, residual: None, tolerance, detail }
    }

    fn skipped(name: &str, tolerance: f64, detail: String) -> Self {
        Self { name: name.into(), status: Status::Skip, residual: None, tolerance, detail }
    }
}

impl fmt::Display for SuiteResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = match self.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
        };
        let residual = self.residual.map_or("-".to_string(), |r| format!("{r:.3e}"));
        write!(f, "{status} {:<14} residual={residual:<10} tol={:.0e}  {}", self.name, self.tolerance, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub suites: Vec<SuiteResult>,
}

impl ValidationReport {
    /// No suite failed. Skips count as passes.
    pub fn passed(&self) -> bool {
        self.suites.iter().all(|s| s.status != Status::Fail)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.suites {
            writeln!(f, "{s}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidateOptions {
    /// Wire used by the KK closure suite.
    pub geometry: WireGeometry,
    /// Emitter distance from the axis for the KK closure suite.
    pub rho: f64,
    /// Test hook: negate the resonant term in the equivalence suite.
    pub inject_sign_flip: bool,
    /// Suites to run, by name; all when empty.
    pub only: Vec<String>,
}

pub const SUITES: [&str; 6] = ["equivalence", "kk-models", "kk-material", "kk-wire", "wronskian", "free-space"];

pub fn run_validation(opts: &ValidateOptions) -> Result<ValidationReport> {
    if let Some(bad) = opts.only.iter().find(|n| !SUITES.contains(&n.as_str())) {
        return Err(crate::Error::Config(format!("unknown suite {bad:?}; known: {}", SUITES.join(", "))));
    }
    let suites = SUITES
        .iter()
        .filter(|name| opts.only.is_empty() || opts.only.iter().any(|n| n == *name))
        .map(|&name| match name {
            "equivalence" => equivalence(opts.inject_sign_flip),
            "kk-models" => kk_models(),
            "kk-material" => kk_material(&opts.geometry),
            "kk-wire" => kk_wire(&opts.geometry, opts.rho),
            "wronskian" => wronskian(),
            _ => free_space(),
        })
        .collect();
    Ok(ValidationReport { suites })
}

fn equivalence(flip: bool) -> SuiteResult {
    const TOL: f64 = 1e-6;
    let run = || -> Result<f64> {
        let mut worst: f64 = 0.0;
        for model in CausalModel::suite(OMEGA_A) {
            let mut terms = contour_shift(|s| model.at(s), OMEGA_A, 1e-10)?;
            if flip {
                terms.resonant = -terms.resonant;
            }
            let oracle = model_pv_shift(&model, OMEGA_A, 1e-9)?;
            worst = worst.max((terms.total() - oracle).abs() / oracle.abs());
        }
        Ok(worst)
    };
    match run() {
        Ok(r) => SuiteResult::judged("equivalence", r, TOL, "1, 2, 3 Lorentzian models vs PV oracle".into()),
        Err(e) => SuiteResult::failed("equivalence", TOL, e.to_string()),
    }
}

fn kk_models() -> SuiteResult {
    const TOL: f64 = 1e-4;
    let run = || -> Result<f64> {
        let lorentz = Lorentz { omega0: 1.5 * OMEGA_A, gamma: 0.1 * OMEGA_A };
        let grid = FrequencyGrid {
            omega_max: 200.0 * OMEGA_A,
            tol: 1e-8,
            features: vec![Feature { center: lorentz.omega0, width: lorentz.gamma }],
        };
        let a = kk_check(|s| Ok(lorentz.at(s)), OMEGA_A, KkForm::Standard, &grid)?;
        let model = &CausalModel::suite(OMEGA_A)[0];
        let grid = FrequencyGrid { features: model.features(), ..grid };
        let b = kk_check(|s| Ok(model.at(s)), OMEGA_A, KkForm::Weighted, &grid)?;
        Ok(a.residual().unwrap_or(f64::INFINITY).max(b.residual().unwrap_or(f64::INFINITY)))
    };
    match run() {
        Ok(r) => SuiteResult::judged("kk-models", r, TOL, "single Lorentzian (standard), causal model (weighted)".into()),
        Err(e) => SuiteResult::failed("kk-models", TOL, e.to_string()),
    }
}

fn kk_outcome(name: &str, tol: f64, outcome: Result<KkOutcome>, what: &str) -> SuiteResult {
    match outcome {
        Ok(KkOutcome::Checked { residual, truncation_warning, .. }) => {
            let note = if truncation_warning { " (tail estimate exceeds residual)" } else { "" };
            SuiteResult::judged(name, residual, tol, format!("{what}{note}"))
        }
        Ok(KkOutcome::Skipped { .. }) => {
            SuiteResult::skipped(name, tol, format!("{what}: Im part vanishes on the grid (lossless)"))
        }
        Err(e) => SuiteResult::failed(name, tol, e.to_string()),
    }
}

fn kk_material(geom: &WireGeometry) -> SuiteResult {
    const TOL: f64 = 1e-4;
    let m = geom.model;
    let chi = |s: SpectralPoint| -> Result<Complex64> { Ok(m.permittivity(s)? - m.eps_inf) };
    let grid = FrequencyGrid {
        omega_max: 200.0 * OMEGA_A,
        tol: 1e-8,
        features: vec![Feature { center: m.gamma_p.max(1e-3 * OMEGA_A), width: m.gamma_p.max(1e-3 * OMEGA_A) }],
    };
    let outcome = kk_check(chi, OMEGA_A, KkForm::Standard, &grid);
    kk_outcome("kk-material", TOL, outcome, "Drude susceptibility ε − ε∞")
}

fn kk_wire(geom: &WireGeometry, rho: f64) -> SuiteResult {
    const TOL: f64 = 1e-3;
    if geom.model.gamma_p == 0.0 {
        return SuiteResult::skipped(
            "kk-wire",
            TOL,
            "lossless metal: Im G^med is a set of delta functions at the guided-mode poles".into(),
        );
    }
    let p = CylPoint::new(rho, 0.0, 0.0);
    let g = |s: SpectralPoint| -> Result<Complex64> { Ok(wire_green(geom, p, p, s, 1e-7)?.0.value.0[0][0]) };
    let surface = geom.model.omega_p / (1.0 + geom.model.eps_inf).sqrt();
    let grid = FrequencyGrid {
        omega_max: 100.0 * OMEGA_A,
        tol: 1e-4,
        features: vec![Feature { center: surface, width: geom.model.gamma_p }],
    };
    let outcome = kk_check(g, OMEGA_A, KkForm::Weighted, &grid);
    kk_outcome("kk-wire", TOL, outcome, "G_rr^med at coincident points, ω² weighted")
}

fn wronskian() -> SuiteResult {
    const TOL: f64 = 1e-10;
    let mut worst: f64 = 0.0;
    for &r in &[0.01, 0.1, 1.0, 5.0, 20.0, 50.0] {
        for &phase in &[0.0, 0.3, 0.5 * PI, 2.5, 3.0] {
            let z = Complex64::from_polar(r, phase);
            for n in 0..=20 {
                match bessel_jh(n, z) {
                    Ok(v) => {
                        let w = v.j * v.h1prime - v.jprime * v.h1;
                        let expect = 2.0 * Complex64::i() / (PI * z);
                        worst = worst.max((w - expect).norm() / expect.norm());
                    }
                    // Orders beyond the representable range at tiny |z|.
                    Err(crate::Error::Overflow(_)) => {}
                    Err(e) => return SuiteResult::failed("wronskian", TOL, format!("n = {n}, z = {z}: {e}")),
                }
            }
        }
    }
    SuiteResult::judged("wronskian", worst, TOL, "n ≤ 20, 0.01 ≤ |z| ≤ 50, upper half-plane".into())
}

fn free_space() -> SuiteResult {
    const TOL: f64 = 1e-6;
    let scaling = (free_space_rate(2.0 * OMEGA_A) / free_space_rate(OMEGA_A) - 8.0).abs() / 8.0;
    if scaling > 1e-12 {
        return SuiteResult::failed("free-space", TOL, format!("ω³ scaling off by {scaling:e}"));
    }
    match im_coincident_limit(OMEGA_A, 1e-3) {
        Ok(v) => {
            let exact = green_vacuum_im_coincident(OMEGA_A);
            SuiteResult::judged("free-space", (v - exact).abs() / exact, TOL, "Γ0 ∝ ω³ and small-r limit of Im G".into())
        }
        Err(e) => SuiteResult::failed("free-space", TOL, e.to_string()),
    }
}
