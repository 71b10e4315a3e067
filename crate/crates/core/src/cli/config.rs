//! Run configuration: a TOML file with `[cavity]` and `[kerr]` sections plus
//! `--set key=value` overrides.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cavity::CavityParams;
use crate::fock::Tolerance;
use crate::kerr::{GridSpec, KerrParams};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConfigFile {
    pub cavity: CavityConfig,
    pub kerr: KerrConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CavityConfig {
    pub lambda: f64,
    pub phi: f64,
    pub phi0_min: f64,
    pub phi0_max: f64,
    pub steps: usize,
    pub n_max: Option<usize>,
}

impl Default for CavityConfig {
    fn default() -> Self {
        Self { lambda: 0.5, phi: PI / 10.0, phi0_min: -PI, phi0_max: PI, steps: 401, n_max: None }
    }
}

impl CavityConfig {
    pub fn validate(&self) -> Result<CavityParams, String> {
        let params = CavityParams::new(self.lambda, self.phi, 0.0).map_err(|e| e.to_string())?;
        if self.steps < 2 {
            return Err(format!("cavity.steps must be at least 2, got {}", self.steps));
        }
        if !(self.phi0_min.is_finite() && self.phi0_max.is_finite() && self.phi0_min < self.phi0_max) {
            return Err("cavity.phi0_min must be finite and below cavity.phi0_max".into());
        }
        Ok(params)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KerrConfig {
    pub lambda: f64,
    pub alpha: f64,
    pub phi: f64,
    pub fock_cut: usize,
    pub half_width: f64,
    pub step: f64,
    pub delta_f: Vec<f64>,
    pub n_max: Option<usize>,
}

impl Default for KerrConfig {
    fn default() -> Self {
        Self {
            lambda: 0.5,
            alpha: 10.0,
            phi: PI / 100.0,
            fock_cut: 10,
            half_width: 5.0,
            step: 0.1,
            delta_f: (0..=8).map(|i| i as f64 / 20.0).collect(),
            n_max: None,
        }
    }
}

impl KerrConfig {
    pub fn validate(&self) -> Result<(KerrParams, GridSpec), String> {
        let grid = GridSpec::new(self.half_width, self.step).map_err(|e| e.to_string())?;
        let params = match self.n_max {
            Some(n) => KerrParams::new(self.lambda, self.alpha, self.phi, self.fock_cut, n),
            None => KerrParams::for_grid(self.lambda, self.alpha, self.phi, self.fock_cut, &grid, &Tolerance::default()),
        }
        .map_err(|e| e.to_string())?;
        if self.delta_f.is_empty() {
            return Err("kerr.delta_f must not be empty".into());
        }
        if self.delta_f.iter().any(|d| !(*d >= 0.0 && d.is_finite())) {
            return Err("kerr.delta_f entries must be non-negative".into());
        }
        if self.delta_f.windows(2).any(|w| w[0] > w[1]) {
            return Err("kerr.delta_f must be sorted ascending".into());
        }
        Ok((params, grid))
    }
}

/// Reads `path` (if any), applies overrides and deserializes. Bare override
/// keys refer to `default_section`.
pub fn load(path: Option<&Path>, overrides: &[String], default_section: &str) -> Result<ConfigFile, String> {
    let mut table = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| format!("cannot read {}: {e}", p.display()))?;
            text.parse::<toml::Table>().map_err(|e| format!("{}: {e}", p.display()))?
        }
        None => toml::Table::new(),
    };
    for item in overrides {
        apply_override(&mut table, item, default_section)?;
    }
    toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| format!("invalid configuration: {e}"))
}

fn apply_override(table: &mut toml::Table, item: &str, default_section: &str) -> Result<(), String> {
    let (key, value) = item.split_once('=').ok_or_else(|| format!("override `{item}` is not of the form key=value"))?;
    let key = key.trim();
    let (section, field) = key.split_once('.').unwrap_or((default_section, key));
    if field.is_empty() || field.contains('.') {
        return Err(format!("malformed override key `{key}`"));
    }
    let parsed: toml::Table =
        format!("v = {}", value.trim()).parse().map_err(|e| format!("cannot parse value of `{key}`: {e}"))?;
    let value = parsed["v"].clone();
    let entry = table.entry(section.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
    match entry {
        toml::Value::Table(t) => {
            t.insert(field.to_string(), value);
            Ok(())
        }
        _ => Err(format!("`{section}` is not a section")),
    }
}
