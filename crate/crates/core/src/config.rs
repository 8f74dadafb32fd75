//! JSON run configuration.
//!
//! Lengths are in units of λ0. Material frequencies are given in units of
//! ω_A and converted on load. Every section may be omitted; missing fields
//! take the defaults below (wire radius 0.01, emitters at ρ = 0.015 with
//! radial dipoles, Δz from 0.02 to 4).

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::emitters::{EmitterPair, SweepOptions, WireSystem};
use crate::error::{Error, Result};
use crate::gvac::CylPoint;
use crate::gwire::{AzimuthalOptions, WireGeometry};
use crate::material::DrudeModel;

pub const SCHEMA: &str = "wireshift.run/v1";

/// Transition frequency in natural units.
pub const OMEGA_A: f64 = 2.0 * PI;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: String,
    #[serde(default)]
    pub wire: WireConfig,
    #[serde(default)]
    pub material: MaterialConfig,
    #[serde(default)]
    pub emitters: EmittersConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WireConfig {
    pub radius: f64,
}

impl Default for WireConfig {
    fn default() -> Self {
        Self { radius: 0.01 }
    }
}

/// Drude parameters; `omega_p` and `gamma_p` in units of ω_A.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaterialConfig {
    pub eps_inf: f64,
    pub omega_p: f64,
    pub gamma_p: f64,
}

impl Default for MaterialConfig {
    fn default() -> Self {
        Self { eps_inf: 1.0, omega_p: 4.0, gamma_p: 0.04 }
    }
}

/// Emitter 1 sits at z = 0; emitter 2 is moved along the axis by the sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmittersConfig {
    pub rho_1: f64,
    pub rho_2: f64,
    pub phi_1: f64,
    pub phi_2: f64,
    /// Unit vectors in the local (ρ̂, φ̂, ẑ) frame.
    pub dipole_1: [f64; 3],
    pub dipole_2: [f64; 3],
    /// Free-space rate over transition frequency, used by the Markov check.
    pub gamma0_over_omega_a: f64,
}

impl Default for EmittersConfig {
    fn default() -> Self {
        Self {
            rho_1: 0.015,
            rho_2: 0.015,
            phi_1: 0.0,
            phi_2: 0.0,
            dipole_1: [1.0, 0.0, 0.0],
            dipole_2: [1.0, 0.0, 0.0],
            gamma0_over_omega_a: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub z_min: f64,
    pub z_max: f64,
    pub n_points: usize,
    pub log_spacing: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { z_min: 0.02, z_max: 4.0, n_points: 100, log_spacing: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureConfig {
    /// Relative tolerance of the kz and κ integrals.
    pub tol: f64,
    /// Relative size of the last azimuthal order at truncation.
    pub azimuthal_tol: f64,
    /// Node budget of each adaptive integral.
    pub node_budget: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { tol: 1e-6, azimuthal_tol: 1e-10, node_budget: crate::spectral::NODE_BUDGET }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Config(format!("unknown format {other:?} (expected csv or json)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Standard output when absent.
    pub path: Option<PathBuf>,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema: SCHEMA.to_string(),
            wire: WireConfig::default(),
            material: MaterialConfig::default(),
            emitters: EmittersConfig::default(),
            sweep: SweepConfig::default(),
            quadrature: QuadratureConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

fn check_tolerance(name: &str, v: f64) -> Result<()> {
    if !(1e-12..=1e-3).contains(&v) {
        return Err(Error::Config(format!("{name} must lie in [1e-12, 1e-3], got {v}")));
    }
    Ok(())
}

impl RunConfig {
    /// Parses and validates.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("malformed config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA {
            return Err(Error::Config(format!("schema must be {SCHEMA:?}, got {:?}", self.schema)));
        }
        let s = &self.sweep;
        if !(s.z_min > 0.0) || !s.z_min.is_finite() {
            return Err(Error::Config(format!("sweep.z_min must be > 0, got {}", s.z_min)));
        }
        if !(s.z_max > s.z_min) || !s.z_max.is_finite() {
            return Err(Error::Config(format!(
                "sweep.z_max must exceed z_min, got [{}, {}]",
                s.z_min, s.z_max
            )));
        }
        if s.n_points < 2 {
            return Err(Error::Config(format!("sweep.n_points must be >= 2, got {}", s.n_points)));
        }
        check_tolerance("quadrature.tol", self.quadrature.tol)?;
        check_tolerance("quadrature.azimuthal_tol", self.quadrature.azimuthal_tol)?;
        if self.quadrature.node_budget < 1000 {
            return Err(Error::Config(format!(
                "quadrature.node_budget must be >= 1000, got {}",
                self.quadrature.node_budget
            )));
        }
        let g = self.emitters.gamma0_over_omega_a;
        if !(g > 0.0) || !g.is_finite() {
            return Err(Error::Config(format!("emitters.gamma0_over_omega_a must be > 0, got {g}")));
        }
        let system = self.system()?;
        system.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    pub fn geometry(&self) -> Result<WireGeometry> {
        let m = &self.material;
        let model = DrudeModel::new(m.eps_inf, m.omega_p * OMEGA_A, m.gamma_p * OMEGA_A)?;
        WireGeometry::new(self.wire.radius, model)
    }

    /// The pair with emitter 2 at axial offset `dz`.
    pub fn pair(&self, dz: f64) -> Result<EmitterPair> {
        let e = &self.emitters;
        EmitterPair::new(
            CylPoint::new(e.rho_1, e.phi_1, 0.0),
            CylPoint::new(e.rho_2, e.phi_2, dz),
            e.dipole_1,
            e.dipole_2,
            OMEGA_A,
        )
        .map_err(|e| Error::Config(e.to_string()))
    }

    /// Geometry and pair at zero separation.
    pub fn system(&self) -> Result<WireSystem> {
        Ok(WireSystem { geometry: self.geometry()?, pair: self.pair(0.0)? })
    }

    pub fn sweep_options(&self) -> SweepOptions {
        let q = &self.quadrature;
        SweepOptions {
            tol: q.tol,
            azimuthal: AzimuthalOptions { tail_tol: q.azimuthal_tol, ..AzimuthalOptions::default() },
            node_budget: q.node_budget,
        }
    }

    /// Sweep separations in increasing order.
    pub fn separations(&self) -> Vec<f64> {
        let s = &self.sweep;
        let n = s.n_points;
        (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                if i + 1 == n {
                    s.z_max
                } else if s.log_spacing {
                    s.z_min * (s.z_max / s.z_min).powf(t)
                } else {
                    s.z_min + (s.z_max - s.z_min) * t
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_takes_defaults() {
        let cfg = RunConfig::from_json(r#"{"schema": "wireshift.run/v1"}"#).unwrap();
        assert_eq!(cfg, RunConfig::default());
        let g = cfg.geometry().unwrap();
        assert_eq!(g.model.omega_p, 4.0 * OMEGA_A);
    }

    #[test]
    fn round_trip() {
        let cfg = RunConfig::default();
        assert_eq!(RunConfig::from_json(&cfg.to_json()).unwrap(), cfg);
    }

    #[test]
    fn rejects_bad_input() {
        let bad = [
            r#"{"schema": "wireshift.run/v2"}"#,
            r#"{"schema": "wireshift.run/v1", "sweep": {"z_min": 0.0}}"#,
            r#"{"schema": "wireshift.run/v1", "sweep": {"z_min": 1.0, "z_max": 1.0, "n_points": 2}}"#,
            r#"{"schema": "wireshift.run/v1", "sweep": {"n_points": 1}}"#,
            r#"{"schema": "wireshift.run/v1", "quadrature": {"tol": 1e-2}}"#,
            r#"{"schema": "wireshift.run/v1", "quadrature": {"tol": 1e-13}}"#,
            r#"{"schema": "wireshift.run/v1", "emitters": {"rho_1": 0.005}}"#,
            r#"{"schema": "wireshift.run/v1", "emitters": {"dipole_1": [1, 1, 0]}}"#,
            r#"{"schema": "wireshift.run/v1", "wire": {"radius": 0.01, "length": 2}}"#,
            r#"{"schema": "wireshift.run/v1", "output": {"format": "xml"}}"#,
            r#"not json"#,
        ];
        for text in bad {
            assert!(matches!(RunConfig::from_json(text), Err(Error::Config(_))), "{text}");
        }
    }

    #[test]
    fn separations_hit_both_ends() {
        let mut cfg = RunConfig::default();
        cfg.sweep = SweepConfig { z_min: 0.01, z_max: 10.0, n_points: 4, log_spacing: true };
        let z = cfg.separations();
        assert_eq!(z.len(), 4);
        assert_eq!((z[0], z[3]), (0.01, 10.0));
        assert!((z[1] - 0.1).abs() < 1e-15 && (z[2] - 1.0).abs() < 1e-14);
    }
}
