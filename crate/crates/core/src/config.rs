// Copyright 2026 ReadoutSim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Flat key-value configuration: file parsing, strict schema validation and
//! resolution into engine parameter structs.
//!
//! All config I/O uses ordinary frequencies (GHz, MHz, kHz), powers in pW
//! and times in ns; the engine works in angular frequencies and SI units.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DriveParams, SystemParams, TWO_PI};

/// Every accepted configuration key, with its unit baked into the name.
pub const SCHEMA_KEYS: &[&str] = &[
    "Q",
    "lambda_nm",
    "gamma0_kHz",
    "gamma_GHz",
    "r_g",
    "g_sim_MHz",
    "eta_QE",
    "eta_cav",
    "eta_det",
    "delta_g_GHz",
    "delta_e_GHz",
    "phi_rad",
    "P_in_pW",
    "delta_a_GHz",
    "delta_c_GHz",
    "t_pulse_ns",
];

/// Named parameter presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Preset {
    /// Near-term target system (Q = 2e5, gamma/2pi = 0.1 GHz, r_g = 10).
    Table3,
    /// Broader-line, lower-Q system used for the fluorescence dynamics study.
    Fig2a,
}

impl Preset {
    pub fn parse(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "table3" => Ok(Preset::Table3),
            "fig2a" => Ok(Preset::Fig2a),
            _ => Err(Error::Config(format!(
                "unknown preset `{name}` (expected `table3` or `fig2a`)"
            ))),
        }
    }

    pub fn system(&self) -> SystemParams {
        match self {
            Preset::Table3 => SystemParams::table3(),
            Preset::Fig2a => SystemParams::fig2a(),
        }
    }
}

/// Parsed flat overrides (strict schema).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    map: BTreeMap<String, f64>,
}

impl Overrides {
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        if !SCHEMA_KEYS.contains(&key) {
            return Err(Error::Config(format!(
                "unknown config key `{key}` (accepted: {})",
                SCHEMA_KEYS.join(", ")
            )));
        }
        self.map.insert(key.to_string(), value);
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.map.get(key).copied()
    }

    /// Later overrides win (CLI flags over config file).
    pub fn merge(&mut self, other: &Overrides) {
        for (k, v) in &other.map {
            self.map.insert(k.clone(), *v);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.map.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

/// Parse an INI-like `key = value` file: one pair per line, `#` or `;`
/// comments, blank lines ignored. Unknown keys and malformed lines are
/// rejected with their line number.
pub fn parse_config_text(text: &str) -> Result<Overrides> {
    let mut out = Overrides::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split(['#', ';']).next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config(format!(
                "line {}: expected `key = value`, got `{raw}`",
                lineno + 1
            )));
        };
        let key = key.trim();
        let value: f64 = value.trim().parse().map_err(|_| {
            Error::Config(format!(
                "line {}: `{}` is not a number (key `{key}`)",
                lineno + 1,
                value.trim()
            ))
        })?;
        out.set(key, value)
            .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
    }
    Ok(out)
}

/// Fully resolved scenario parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Resolved {
    pub system: SystemParams,
    pub p_in: f64,
    pub t_pulse: f64,
    /// `None` means "protocol default" (resonant with A for fluorescence,
    /// optimized for reflection).
    pub delta_a: Option<f64>,
    pub delta_c: Option<f64>,
}

impl Resolved {
    /// Apply overrides on top of a preset, with protocol-level drive
    /// defaults (`p_in_default` in W, `t_pulse_default` in s).
    pub fn from_overrides(
        preset: Preset,
        ov: &Overrides,
        p_in_default: f64,
        t_pulse_default: f64,
    ) -> Self {
        let mut system = preset.system();
        let g = |k: &str| ov.get(k);
        if let Some(v) = g("Q") {
            system.q = v;
        }
        if let Some(v) = g("lambda_nm") {
            system.lambda = v * 1e-9;
        }
        if let Some(v) = g("gamma0_kHz") {
            system.gamma0 = TWO_PI * v * 1e3;
        }
        if let Some(v) = g("gamma_GHz") {
            system.gamma = TWO_PI * v * 1e9;
        }
        if let Some(v) = g("r_g") {
            system.r_g = v;
        }
        if let Some(v) = g("g_sim_MHz") {
            system.g_sim = TWO_PI * v * 1e6;
        }
        if let Some(v) = g("eta_QE") {
            system.eta_qe = v;
        }
        if let Some(v) = g("eta_cav") {
            system.eta_cav = v;
        }
        if let Some(v) = g("eta_det") {
            system.eta_det = v;
        }
        if let Some(v) = g("delta_g_GHz") {
            system.delta_g = TWO_PI * v * 1e9;
        }
        if let Some(v) = g("delta_e_GHz") {
            system.delta_e = TWO_PI * v * 1e9;
        }
        if let Some(v) = g("phi_rad") {
            system.phi = v;
        }
        Resolved {
            system,
            p_in: g("P_in_pW").map_or(p_in_default, |v| v * 1e-12),
            t_pulse: g("t_pulse_ns").map_or(t_pulse_default, |v| v * 1e-9),
            delta_a: g("delta_a_GHz").map(|v| TWO_PI * v * 1e9),
            delta_c: g("delta_c_GHz").map(|v| TWO_PI * v * 1e9),
        }
    }

    pub fn drive_or(&self, default_delta_a: f64, default_delta_c: f64) -> DriveParams {
        DriveParams {
            p_in: self.p_in,
            delta_a: self.delta_a.unwrap_or(default_delta_a),
            delta_c: self.delta_c.unwrap_or(default_delta_c),
            t_pulse: self.t_pulse,
        }
    }

    /// Dry-run validation: schema-level and physical-range violations,
    /// without running any dynamics.
    pub fn validation_report(&self) -> Vec<String> {
        let mut v = self.system.violations();
        if self.p_in < 0.0 {
            v.push(format!("P_in must be non-negative (got {} W)", self.p_in));
        }
        if !(self.t_pulse > 0.0) {
            v.push(format!("t_pulse must be positive (got {} s)", self.t_pulse));
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn parses_simple_file() {
        let text = "\n# system\nQ = 2e5\ngamma_GHz = 0.1   ; broadened\n\nP_in_pW=3.8\n";
        let ov = parse_config_text(text).unwrap();
        assert_eq!(ov.get("Q"), Some(2e5));
        assert_eq!(ov.get("gamma_GHz"), Some(0.1));
        assert_eq!(ov.get("P_in_pW"), Some(3.8));
    }

    #[test]
    fn rejects_unknown_key_with_line_number() {
        let err = parse_config_text("Q = 1e5\nkappa_GHz = 1.0\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 2"), "{msg}");
        assert!(msg.contains("kappa_GHz"), "{msg}");
    }

    #[test]
    fn rejects_malformed_line() {
        let err = parse_config_text("Q: 1e5\n").unwrap_err();
        assert!(err.to_string().contains("expected `key = value`"));
    }

    #[test]
    fn rejects_non_numeric_value() {
        let err = parse_config_text("Q = fast\n").unwrap_err();
        assert!(err.to_string().contains("not a number"));
    }

    #[test]
    fn overrides_resolve_with_units() {
        let mut ov = Overrides::default();
        ov.set("gamma_GHz", 1.0).unwrap();
        ov.set("t_pulse_ns", 25.0).unwrap();
        ov.set("delta_a_GHz", -2.0).unwrap();
        let r = Resolved::from_overrides(Preset::Table3, &ov, 100e-12, 10e-9);
        assert_relative_eq!(r.system.gamma, TWO_PI * 1e9, max_relative = 1e-12);
        assert_relative_eq!(r.t_pulse, 25e-9, max_relative = 1e-12);
        assert_relative_eq!(r.delta_a.unwrap(), -TWO_PI * 2e9, max_relative = 1e-12);
        assert_eq!(r.delta_c, None);
        assert_relative_eq!(r.p_in, 100e-12, max_relative = 1e-12);
    }

    #[test]
    fn cli_flags_win_over_file() {
        let mut file = Overrides::default();
        file.set("Q", 1e5).unwrap();
        file.set("r_g", 5.0).unwrap();
        let mut flags = Overrides::default();
        flags.set("Q", 2e5).unwrap();
        file.merge(&flags);
        assert_eq!(file.get("Q"), Some(2e5));
        assert_eq!(file.get("r_g"), Some(5.0));
    }

    #[test]
    fn validation_flags_bad_ranges() {
        let mut ov = Overrides::default();
        ov.set("gamma_GHz", 0.0001).unwrap(); // below gamma0
        ov.set("eta_cav", 1.5).unwrap();
        let r = Resolved::from_overrides(Preset::Table3, &ov, 100e-12, 10e-9);
        let report = r.validation_report();
        assert!(report.iter().any(|s| s.contains("gamma")));
        assert!(report.iter().any(|s| s.contains("eta_cav")));
    }

    #[test]
    fn preset_plus_empty_overrides_is_valid() {
        let r = Resolved::from_overrides(Preset::Table3, &Overrides::default(), 100e-12, 10e-9);
        assert!(r.validation_report().is_empty());
    }
}
