//! Experiment configuration: sectioned TOML with defaults, strict unknown-key
//! rejection, and validation of presets, check names, and parameter ranges.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::AdvectionScheme;
use crate::grid::GridSpec;

pub const PRESETS: [&str; 3] = ["zero", "gaussian", "vortex_ring"];
pub const CHECKS: [&str; 8] = [
    "max_principle",
    "energy",
    "zeta_envelope",
    "gamma_energy",
    "gamma1_energy",
    "hls",
    "log_estimate",
    "stability",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub nr: usize,
    pub nz: usize,
    pub rmax: f64,
    pub zmin: f64,
    pub zmax: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            nr: 128,
            nz: 256,
            rmax: 4.0,
            zmin: -4.0,
            zmax: 4.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicsSection {
    pub kappa: f64,
    pub kappa_sweep: Vec<f64>,
}

impl Default for PhysicsSection {
    fn default() -> Self {
        Self {
            kappa: 0.5,
            kappa_sweep: vec![0.0, 0.1, 0.5, 0.9, 1.0, 2.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeSection {
    pub dt: f64,
    pub t_end: f64,
    /// Record the series every `cadence` steps.
    pub cadence: usize,
    pub cfl_max: f64,
    pub scheme: AdvectionScheme,
}

impl Default for TimeSection {
    fn default() -> Self {
        Self {
            dt: 5e-3,
            t_end: 1.0,
            cadence: 1,
            cfl_max: 0.45,
            scheme: AdvectionScheme::Upwind2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitSection {
    pub preset: String,
    pub rho_amp: f64,
    pub zeta_amp: f64,
}

impl Default for InitSection {
    fn default() -> Self {
        Self {
            preset: "vortex_ring".to_string(),
            rho_amp: 0.5,
            zeta_amp: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MonitorsSection {
    pub enabled: Vec<String>,
    /// Fill the dyadic-norm column (adds an eigenbasis build per grid).
    pub besov: bool,
}

impl Default for MonitorsSection {
    fn default() -> Self {
        Self {
            enabled: vec![
                "max_principle".to_string(),
                "energy".to_string(),
                "zeta_envelope".to_string(),
                "hls".to_string(),
            ],
            besov: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub directory: String,
    /// Write a checkpoint every this many steps; 0 disables intermediate
    /// checkpoints (the final state is always written).
    pub checkpoint_cadence: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: "out".to_string(),
            checkpoint_cadence: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub grid: GridSection,
    pub physics: PhysicsSection,
    pub time: TimeSection,
    pub init: InitSection,
    pub monitors: MonitorsSection,
    pub output: OutputSection,
}

impl ExperimentConfig {
    pub fn grid_spec(&self) -> Result<GridSpec> {
        crate::grid::make_grid(
            self.grid.nr,
            self.grid.nz,
            self.grid.rmax,
            self.grid.zmin,
            self.grid.zmax,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.physics.kappa < 0.0 {
            return Err(Error::Config(format!(
                "physics.kappa must be >= 0, got {}",
                self.physics.kappa
            )));
        }
        if let Some(k) = self.physics.kappa_sweep.iter().find(|&&k| k < 0.0) {
            return Err(Error::Config(format!(
                "physics.kappa_sweep entries must be >= 0, got {k}"
            )));
        }
        if !(self.time.dt > 0.0) {
            return Err(Error::Config(format!("time.dt must be > 0, got {}", self.time.dt)));
        }
        if !(self.time.t_end > 0.0) {
            return Err(Error::Config(format!(
                "time.t_end must be > 0, got {}",
                self.time.t_end
            )));
        }
        if !(self.time.cfl_max > 0.0 && self.time.cfl_max <= 1.0) {
            return Err(Error::Config(format!(
                "time.cfl_max must be in (0, 1], got {}",
                self.time.cfl_max
            )));
        }
        if self.time.cadence == 0 {
            return Err(Error::Config("time.cadence must be >= 1".into()));
        }
        if !PRESETS.contains(&self.init.preset.as_str()) {
            return Err(Error::Config(format!(
                "unknown preset '{}', expected one of {:?}",
                self.init.preset, PRESETS
            )));
        }
        for name in &self.monitors.enabled {
            if !CHECKS.contains(&name.as_str()) {
                return Err(Error::Config(format!(
                    "unknown check '{name}', expected one of {CHECKS:?}"
                )));
            }
        }
        self.grid_spec()?;
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let cfg: ExperimentConfig =
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!(cfg.physics.kappa_sweep, vec![0.0, 0.1, 0.5, 0.9, 1.0, 2.0]);
    }

    #[test]
    fn negative_kappa_is_rejected() {
        let err = parse_config("[physics]\nkappa = -1.0\n").unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(parse_config("[grid]\nnr = 32\nfrobnicate = 1\n").is_err());
        assert!(parse_config("[turbulence]\nmodel = \"none\"\n").is_err());
    }

    #[test]
    fn unknown_preset_and_check_are_rejected() {
        assert!(parse_config("[init]\npreset = \"tornado\"\n").is_err());
        assert!(parse_config("[monitors]\nenabled = [\"psychic\"]\n").is_err());
    }

    #[test]
    fn full_config_round_trips() {
        let mut cfg = ExperimentConfig::default();
        cfg.grid.nr = 64;
        cfg.physics.kappa = 1.5;
        cfg.time.scheme = AdvectionScheme::CenteredRk2;
        cfg.monitors.enabled.push("log_estimate".to_string());
        cfg.monitors.besov = true;
        let text = cfg.to_toml();
        let back = parse_config(&text).unwrap();
        assert_eq!(cfg, back);
        assert_eq!(back.to_toml(), text);
    }

    #[test]
    fn parse_error_carries_location() {
        let err = parse_config("[time\ndt = 0.01").unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("line"), "error lacks location: {msg}");
    }
}
