//! Run configuration: one flat JSON object, versioned, with strict keys.
//!
//! Physical keys default to the reference parameters of the energy and
//! entanglement figures. Keys whose defaults depend on others (`cutoff`,
//! `V`, `omega_d`, `omega_i`, `t_end`) may be left out or set to `null`
//! and are filled in by [`RunConfig::resolve`].

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::correlators::{ContinuumSettings, Mode, DEFAULT_K_MAX};
use crate::error::{Error, Result};
use crate::model::{BandPair, Driving, SpectralModel, System};

pub const SCHEMA_VERSION: u32 = 1;

/// Which numerical route produces the reported columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Analytic,
    Oracle,
    Both,
}

impl Source {
    pub fn analytic(self) -> bool {
        self != Source::Oracle
    }

    pub fn oracle(self) -> bool {
        self != Source::Analytic
    }
}

/// Temperature presets of the three spectrum panels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Panel {
    /// Both baths at zero temperature.
    A,
    /// Left bath at 10γ₀.
    B,
    /// Both baths at 10γ₀.
    C,
}

impl Panel {
    pub fn temperatures(self, gamma0: f64) -> (f64, f64) {
        match self {
            Panel::A => (0.0, 0.0),
            Panel::B => (0.0, 10.0 * gamma0),
            Panel::C => (10.0 * gamma0, 10.0 * gamma0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "schema_version")]
    pub schema_version: u32,

    #[serde(default = "d_gamma0")]
    pub gamma0: f64,
    /// Λ; defaults to 20ω_r.
    #[serde(default)]
    pub cutoff: Option<f64>,
    #[serde(default = "d_omega_r")]
    pub omega_r: f64,
    /// Drive amplitude in V_R(t) = ω_r² + V cos ω_d t; defaults to ω_r²/32.
    #[serde(default, rename = "V")]
    pub v: Option<f64>,
    /// Defaults to ω_r − 10γ₀.
    #[serde(default)]
    pub omega_d: Option<f64>,
    #[serde(default = "d_half", rename = "split_R")]
    pub split_r: f64,
    #[serde(default, rename = "T_R")]
    pub t_r: f64,
    #[serde(default, rename = "T_L")]
    pub t_l: f64,
    #[serde(default = "d_delta_omega")]
    pub delta_omega: f64,
    /// m/m_i.
    #[serde(default = "d_mass_ratio")]
    pub mass_ratio: f64,

    /// Band in the right bath; defaults to ω_d − δ.
    #[serde(default)]
    pub omega_i: Option<f64>,
    /// Partner band in the left bath; defaults to ω_d − ω_i.
    #[serde(default)]
    pub omega_j: Option<f64>,
    /// Lower end of frequency sweeps; sweeps over ω_i default to (0, ω_d).
    #[serde(default)]
    pub omega_min: Option<f64>,
    #[serde(default)]
    pub omega_max: Option<f64>,
    #[serde(default = "d_grid_points")]
    pub grid_points: usize,
    /// Defaults to 20/γ₀.
    #[serde(default)]
    pub t_end: Option<f64>,
    #[serde(default = "d_t_points")]
    pub t_points: usize,
    /// Largest temperature of threshold sweeps, in units of the band's T*.
    #[serde(default = "d_t_star_factor")]
    pub t_star_factor: f64,
    #[serde(default = "d_k_max")]
    pub k_max: usize,
    /// Recursion order of the Floquet table; `null` solves the truncated
    /// system exactly.
    #[serde(default = "d_order")]
    pub order: Option<usize>,
    #[serde(default = "d_mode")]
    pub mode: Mode,
    #[serde(default = "d_source")]
    pub source: Source,
    #[serde(default = "d_panel")]
    pub panel: Panel,
    /// Relative tolerance of the continuum integrals; sweeps default to a
    /// looser value than single evaluations.
    #[serde(default)]
    pub rel_tol: Option<f64>,
    #[serde(default = "d_oracle_steps")]
    pub oracle_steps_per_period: usize,
}

fn schema_version() -> u32 {
    SCHEMA_VERSION
}
fn d_gamma0() -> f64 {
    0.005
}
fn d_omega_r() -> f64 {
    4.0
}
fn d_half() -> f64 {
    0.5
}
fn d_delta_omega() -> f64 {
    5e-4
}
fn d_mass_ratio() -> f64 {
    10.0
}
fn d_grid_points() -> usize {
    100
}
fn d_t_points() -> usize {
    201
}
fn d_t_star_factor() -> f64 {
    2.0
}
fn d_k_max() -> usize {
    DEFAULT_K_MAX
}
fn d_order() -> Option<usize> {
    Some(2)
}
fn d_mode() -> Mode {
    Mode::Exact
}
fn d_source() -> Source {
    Source::Analytic
}
fn d_panel() -> Panel {
    Panel::A
}
fn d_oracle_steps() -> usize {
    1024
}

/// Relative tolerance used by sweeps when `rel_tol` is unset.
pub const SWEEP_REL_TOL: f64 = 1e-3;

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_value(Value::Object(Map::new())).expect("all keys have defaults")
    }
}

/// Parse `key=value`; the value is read as JSON when it parses, otherwise
/// as a bare string (so `mode=longtime` works without quotes).
pub fn parse_override(s: &str) -> Result<(String, Value)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{s}` is not of the form key=value")))?;
    let k = k.trim();
    if k.is_empty() {
        return Err(Error::Config(format!("override `{s}` has an empty key")));
    }
    let v = v.trim();
    let value = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()));
    Ok((k.to_string(), value))
}

impl RunConfig {
    /// Build from an optional JSON file plus `key=value` overrides, then
    /// resolve and validate.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<RunConfig> {
        let mut map = match path {
            None => Map::new(),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
                match serde_json::from_str(&text) {
                    Ok(Value::Object(m)) => m,
                    Ok(_) => return Err(Error::Config(format!("{} must hold a JSON object", p.display()))),
                    Err(e) => return Err(Error::Config(format!("{}: {e}", p.display()))),
                }
            }
        };
        for o in overrides {
            let (k, v) = parse_override(o)?;
            map.insert(k, v);
        }
        Self::from_map(map)
    }

    pub fn from_map(map: Map<String, Value>) -> Result<RunConfig> {
        let cfg: RunConfig = serde_json::from_value(Value::Object(map)).map_err(|e| Error::Config(e.to_string()))?;
        cfg.resolve()
    }

    /// Fill derived defaults and validate.
    pub fn resolve(mut self) -> Result<RunConfig> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let g = self.gamma0;
        self.cutoff.get_or_insert(20.0 * self.omega_r);
        self.v.get_or_insert(self.omega_r * self.omega_r / 32.0);
        let wd = *self.omega_d.get_or_insert(self.omega_r - 10.0 * g);
        let delta = self.omega_r - wd;
        let wi = *self.omega_i.get_or_insert(if delta > 0.0 { wd - delta } else { 0.5 * wd });
        self.omega_j.get_or_insert(wd - wi);
        if g > 0.0 {
            self.t_end.get_or_insert(20.0 / g);
        }
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        let positive = [
            ("gamma0", self.gamma0),
            ("omega_r", self.omega_r),
            ("delta_omega", self.delta_omega),
            ("mass_ratio", self.mass_ratio),
            ("t_star_factor", self.t_star_factor),
        ];
        for (k, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{k} must be a positive number, got {v}")));
            }
        }
        for (k, v) in [("T_R", self.t_r), ("T_L", self.t_l)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{k} must be >= 0, got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&self.split_r) {
            return Err(Error::Config(format!("split_R must lie in [0, 1], got {}", self.split_r)));
        }
        for (k, v) in [("omega_i", self.omega_i), ("omega_j", self.omega_j)] {
            if let Some(v) = v {
                if !(v > 0.0) {
                    return Err(Error::Config(format!("{k} must be > 0, got {v}")));
                }
            }
        }
        if let (Some(a), Some(b)) = (self.omega_min, self.omega_max) {
            if !(b > a) {
                return Err(Error::Config(format!("omega_max = {b} must exceed omega_min = {a}")));
            }
        }
        if self.grid_points < 2 || self.t_points < 2 {
            return Err(Error::Config("grid_points and t_points must be >= 2".into()));
        }
        if matches!(self.order, Some(m) if m > self.k_max) {
            return Err(Error::Config(format!("order must not exceed k_max = {}", self.k_max)));
        }
        if let Some(r) = self.rel_tol {
            if !(r > 0.0 && r < 1.0) {
                return Err(Error::Config(format!("rel_tol must lie in (0, 1), got {r}")));
            }
        }
        if self.oracle_steps_per_period < 16 {
            return Err(Error::Config("oracle_steps_per_period must be >= 16".into()));
        }
        if !matches!(self.t_end, Some(t) if t > 0.0) {
            return Err(Error::Config("t_end must be > 0".into()));
        }
        self.system()?;
        Ok(())
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff.unwrap_or(20.0 * self.omega_r)
    }

    pub fn amplitude(&self) -> f64 {
        self.v.unwrap_or(self.omega_r * self.omega_r / 32.0)
    }

    pub fn omega_d(&self) -> f64 {
        self.omega_d.unwrap_or(self.omega_r - 10.0 * self.gamma0)
    }

    pub fn t_end(&self) -> f64 {
        self.t_end.unwrap_or(20.0 / self.gamma0)
    }

    /// m_i for a system of unit mass.
    pub fn band_mass(&self) -> f64 {
        1.0 / self.mass_ratio
    }

    pub fn system(&self) -> Result<System> {
        let model = SpectralModel::new(self.gamma0, self.cutoff(), self.split_r).map_err(as_config)?;
        let driving = Driving::new(self.omega_r, self.amplitude(), self.omega_d()).map_err(as_config)?;
        Ok(System { model, driving })
    }

    /// The configured band pair at the configured temperatures.
    pub fn pair(&self) -> BandPair {
        let wi = self.omega_i.expect("resolved");
        let wj = self.omega_j.expect("resolved");
        BandPair::new(wi, wj, self.delta_omega, self.band_mass(), self.t_r, self.t_l).with_overlap()
    }

    /// Continuum settings for single evaluations (`sweep = false`) or
    /// parameter sweeps.
    pub fn continuum(&self, sweep: bool) -> ContinuumSettings {
        let mut s = ContinuumSettings::default();
        if let Some(r) = self.rel_tol {
            s.quad.rel_tol = r;
        } else if sweep {
            s.quad.rel_tol = SWEEP_REL_TOL;
        }
        s
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("config is plain data")
    }
}

fn as_config(e: Error) -> Error {
    match e {
        Error::Config(m) | Error::Domain(m) => Error::Config(m),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(sets: &[&str]) -> Result<RunConfig> {
        RunConfig::load(None, &sets.iter().map(|s| s.to_string()).collect::<Vec<_>>())
    }

    #[test]
    fn defaults_resolve_to_reference_system() {
        let c = load(&[]).unwrap();
        assert_eq!(c.system().unwrap(), System::reference());
        assert!((c.omega_i.unwrap() - 3.9).abs() < 1e-12);
        assert!((c.omega_j.unwrap() - 0.05).abs() < 1e-12);
        assert!((c.t_end() - 4000.0).abs() < 1e-9);
        assert!((c.band_mass() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = load(&["omega_x=1"]).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("omega_x"), "{e}");
    }

    #[test]
    fn overrides_parse_json_and_bare_strings() {
        let c = load(&["V=0", "mode=longtime", "source=\"both\"", "order=null", "T_L=0.05"]).unwrap();
        assert_eq!(c.amplitude(), 0.0);
        assert_eq!(c.mode, Mode::Longtime);
        assert_eq!(c.source, Source::Both);
        assert_eq!(c.order, None);
        assert_eq!(c.t_l, 0.05);
    }

    #[test]
    fn derived_defaults_follow_overrides() {
        let c = load(&["omega_r=2", "gamma0=0.01"]).unwrap();
        assert_eq!(c.cutoff(), 40.0);
        assert_eq!(c.amplitude(), 0.125);
        assert!((c.omega_d() - 1.9).abs() < 1e-12);
        assert!((c.t_end() - 2000.0).abs() < 1e-9);
    }

    #[test]
    fn invalid_values_are_config_errors() {
        for bad in [&["gamma0=-1"][..], &["split_R=2"], &["T_R=-0.1"], &["schema_version=7"], &["order=9"], &["mode=fast"], &["oops"]]
        {
            let e = load(bad).unwrap_err();
            assert_eq!(e.exit_code(), 2, "{bad:?}: {e}");
        }
    }

    #[test]
    fn resolved_config_round_trips() {
        let c = load(&["T_L=0.05", "panel=b"]).unwrap();
        let back: RunConfig = serde_json::from_value(c.to_json()).unwrap();
        assert_eq!(back.resolve().unwrap(), c);
    }
}
