//! Separation sweeps and their tabular output.
//!
//! Numbers are written with 17 significant digits so a table read back
//! reproduces every value bit for bit.

use std::io::{self, Write};

use serde::ser::{Error as _, Serializer};
use serde::{Deserialize, Serialize};

use crate::config::{Format, RunConfig};
use crate::emitters::{
    analytic_approximations, fit_plasmon_lorentzian, LorentzianFit, RateShiftEngine,
    RateShiftResult,
};
use crate::error::Result;

/// One output row; ratios are to the exact Γ11, the plasmon estimates
/// included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub dz: f64,
    /// In units of Γ0.
    pub gamma11: f64,
    pub gamma12_over_gamma11: f64,
    pub shift_total_over_gamma11: f64,
    pub shift_resonant_over_gamma11: f64,
    pub shift_integral_over_gamma11: f64,
    /// Absent when the plasmon fit failed.
    pub gamma12_appr_over_gamma11: Option<f64>,
    pub shift_appr_over_gamma11: Option<f64>,
    /// Covers `gamma11` and `gamma12_over_gamma11`.
    pub rates_converged: bool,
    /// Covers the three shift columns.
    pub shifts_converged: bool,
}

pub const COLUMNS: [&str; 10] = [
    "dz",
    "gamma11",
    "gamma12_over_gamma11",
    "shift_total_over_gamma11",
    "shift_resonant_over_gamma11",
    "shift_integral_over_gamma11",
    "gamma12_appr_over_gamma11",
    "shift_appr_over_gamma11",
    "rates_converged",
    "shifts_converged",
];

impl SweepRow {
    pub fn new(r: &RateShiftResult, fit: Option<&LorentzianFit>) -> Self {
        let o = r.over_gamma11();
        let appr = fit.and_then(|f| analytic_approximations(f, r.dz.abs()).ok());
        Self {
            dz: r.dz,
            gamma11: r.gamma11,
            gamma12_over_gamma11: o.gamma12,
            shift_total_over_gamma11: o.shift12_total,
            shift_resonant_over_gamma11: o.shift12_resonant,
            shift_integral_over_gamma11: o.shift12_integral,
            gamma12_appr_over_gamma11: appr.map(|a| a.gamma12_over_gamma11 * a.gamma11_appr / r.gamma11),
            shift_appr_over_gamma11: appr.map(|a| a.shift12_over_gamma11 * a.gamma11_appr / r.gamma11),
            rates_converged: r.rates_converged,
            shifts_converged: r.shifts_converged,
        }
    }

    pub fn converged(&self) -> bool {
        self.rates_converged && self.shifts_converged
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub fit: Option<LorentzianFit>,
    pub results: Vec<RateShiftResult>,
    pub rows: Vec<SweepRow>,
}

/// Runs the configured sweep.
pub fn run_sweep(cfg: &RunConfig) -> Result<SweepTable> {
    sweep_at(cfg, &cfg.separations())
}

/// Rates, shifts and plasmon approximations at the given separations.
pub fn sweep_at(cfg: &RunConfig, dzs: &[f64]) -> Result<SweepTable> {
    let system = cfg.system()?;
    let fit = match fit_plasmon_lorentzian(&system.geometry, cfg.emitters.rho_1, system.pair.omega_a) {
        Ok(f) => Some(f),
        Err(e) => {
            log::warn!("no plasmon approximation columns: {e}");
            None
        }
    };
    let engine = RateShiftEngine::new(system, cfg.sweep_options())?;
    let results = engine.evaluate(dzs)?;
    let rows = results.iter().map(|r| SweepRow::new(r, fit.as_ref())).collect();
    Ok(SweepTable { fit, results, rows })
}

fn sig17(v: f64) -> String {
    format!("{v:.16e}")
}

fn cells(row: &SweepRow) -> [String; 10] {
    let opt = |v: Option<f64>| v.map_or(String::new(), sig17);
    [
        sig17(row.dz),
        sig17(row.gamma11),
        sig17(row.gamma12_over_gamma11),
        sig17(row.shift_total_over_gamma11),
        sig17(row.shift_resonant_over_gamma11),
        sig17(row.shift_integral_over_gamma11),
        opt(row.gamma12_appr_over_gamma11),
        opt(row.shift_appr_over_gamma11),
        row.rates_converged.to_string(),
        row.shifts_converged.to_string(),
    ]
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS)?;
    for row in rows {
        w.write_record(cells(row))?;
    }
    w.flush()
}

/// A number printed with 17 significant digits.
struct Sig17(f64);

impl Serialize for Sig17 {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        serde_json::value::RawValue::from_string(sig17(self.0)).map_err(S::Error::custom)?.serialize(s)
    }
}

#[derive(Serialize)]
struct JsonRow {
    dz: Sig17,
    gamma11: Sig17,
    gamma12_over_gamma11: Sig17,
    shift_total_over_gamma11: Sig17,
    shift_resonant_over_gamma11: Sig17,
    shift_integral_over_gamma11: Sig17,
    gamma12_appr_over_gamma11: Option<Sig17>,
    shift_appr_over_gamma11: Option<Sig17>,
    rates_converged: bool,
    shifts_converged: bool,
}

/// A JSON array with one record per line.
pub fn write_json<W: Write>(rows: &[SweepRow], mut out: W) -> io::Result<()> {
    writeln!(out, "[")?;
    for (i, r) in rows.iter().enumerate() {
        let rec = JsonRow {
            dz: Sig17(r.dz),
            gamma11: Sig17(r.gamma11),
            gamma12_over_gamma11: Sig17(r.gamma12_over_gamma11),
            shift_total_over_gamma11: Sig17(r.shift_total_over_gamma11),
            shift_resonant_over_gamma11: Sig17(r.shift_resonant_over_gamma11),
            shift_integral_over_gamma11: Sig17(r.shift_integral_over_gamma11),
            gamma12_appr_over_gamma11: r.gamma12_appr_over_gamma11.map(Sig17),
            shift_appr_over_gamma11: r.shift_appr_over_gamma11.map(Sig17),
            rates_converged: r.rates_converged,
            shifts_converged: r.shifts_converged,
        };
        let sep = if i + 1 < rows.len() { "," } else { "" };
        writeln!(out, "{}{sep}", serde_json::to_string(&rec)?)?;
    }
    writeln!(out, "]")
}

pub fn write_rows<W: Write>(rows: &[SweepRow], format: Format, out: W) -> io::Result<()> {
    match format {
        Format::Csv => write_csv(rows, out),
        Format::Json => write_json(rows, out),
    }
}
