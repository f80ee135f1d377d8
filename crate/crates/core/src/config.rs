//! Run configuration read from JSON.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::InputError;
use crate::market::FrpMode;
use crate::requirements::{TerminalRule, Z_95};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Sweeps {
    /// $/MWh values re-run in validation; empty means no sweep.
    pub voll: Vec<f64>,
    /// Hourly sigma fractions re-run in validation.
    pub sigma_fraction: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub system: PathBuf,
    pub profile: PathBuf,
    pub modes: Vec<FrpMode>,
    pub z: f64,
    /// Hourly forecast-error std as a fraction of the hourly forecast, used
    /// when the profile file carries no sigma values.
    pub sigma_fraction: f64,
    /// $/MWh
    pub voll: f64,
    pub scenarios: usize,
    pub seed: u64,
    /// Read scenarios from this file instead of drawing them.
    pub scenario_file: Option<PathBuf>,
    pub mip_gap: f64,
    /// Seconds per solve.
    pub time_limit: f64,
    pub fs_bid_multiplier: f64,
    /// $/MWh; defaults to half of `voll`.
    pub spike_threshold: Option<f64>,
    pub terminal_rule: TerminalRule,
    /// Scenario workers; 0 uses every core.
    pub threads: usize,
    pub sweeps: Sweeps,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            system: PathBuf::from("system.json"),
            profile: PathBuf::from("profile.csv"),
            modes: FrpMode::ALL.to_vec(),
            z: Z_95,
            sigma_fraction: 0.05,
            voll: 10_000.0,
            scenarios: 500,
            seed: 1,
            scenario_file: None,
            mip_gap: 1e-3,
            time_limit: 600.0,
            fs_bid_multiplier: 1.0,
            spike_threshold: None,
            terminal_rule: TerminalRule::Zero,
            threads: 0,
            sweeps: Sweeps::default(),
            output_dir: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    /// Reads a config file; relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, InputError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| InputError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut config: RunConfig = serde_json::from_str(&text).map_err(|e| InputError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut config.system, &mut config.profile, &mut config.output_dir] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if let Some(p) = config.scenario_file.as_mut().filter(|p| p.is_relative()) {
            *p = base.join(&*p);
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), InputError> {
        let bad = |message: String| Err(InputError::invalid("config", message));
        if self.modes.is_empty() {
            return bad("at least one mode is required".into());
        }
        if !(self.z.is_finite() && self.z > 0.0) {
            return bad(format!("z must be positive, got {}", self.z));
        }
        for (name, v) in [
            ("sigma_fraction", self.sigma_fraction),
            ("mip_gap", self.mip_gap),
            ("fs_bid_multiplier", self.fs_bid_multiplier),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be non-negative, got {v}"));
            }
        }
        for (name, v) in [("voll", self.voll), ("time_limit", self.time_limit)] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if self.scenarios == 0 && self.scenario_file.is_none() {
            return bad("scenarios must be at least 1".into());
        }
        if self.sweeps.voll.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return bad("sweep VOLL values must be positive".into());
        }
        if self.sweeps.sigma_fraction.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return bad("sweep sigma fractions must be non-negative".into());
        }
        Ok(())
    }
}
