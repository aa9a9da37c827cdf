//! TOML experiment configuration, molecule files and built-in presets.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::hamiltonian::MoleculeSpec;
use crate::states::EntangledStateKind;

/// A non-standard clock taking part in the run.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartySpec {
    pub index: usize,
    pub omega_hz: f64,
}

/// Inclusive, equally spaced offset grid.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeltaGrid {
    pub start_s: f64,
    pub stop_s: f64,
    pub count: usize,
}

impl DeltaGrid {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start_s];
        }
        let step = (self.stop_s - self.start_s) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| self.start_s + i as f64 * step)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableSpec {
    pub omegas_hz: Vec<f64>,
    /// Phase `ωΔ` at which every cell is evaluated, radians.
    #[serde(default = "default_phase")]
    pub phase_rad: f64,
}

fn default_phase() -> f64 {
    FRAC_PI_2
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub standard_index: usize,
    pub kinds: Vec<EntangledStateKind>,
    #[serde(default)]
    pub parties: Vec<PartySpec>,
    pub delta: Option<DeltaGrid>,
    pub shots: Option<u64>,
    pub trials: Option<u64>,
    #[serde(default)]
    pub seed: u64,
    pub molecule: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub table: Option<TableSpec>,
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl ExperimentConfig {
    /// Parses TOML text; `origin` names the source in diagnostics.
    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self> {
        let config: Self =
            toml::from_str(text).map_err(|e| config_err(format!("{origin}: {e}")))?;
        config.validate().map_err(|e| match e {
            Error::Config(msg) => config_err(format!("{origin}: {msg}")),
            other => other,
        })?;
        Ok(config)
    }

    /// Loads a config file; a relative `molecule` path is resolved against
    /// the config file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        let mut config = Self::from_toml_str(&text, &path.display().to_string())?;
        if let (Some(m), Some(dir)) = (config.molecule.as_mut(), path.parent()) {
            if m.is_relative() {
                *m = dir.join(&*m);
            }
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.kinds.is_empty() {
            return Err(config_err("kinds: at least one state kind is required"));
        }
        for (i, kind) in self.kinds.iter().enumerate() {
            kind.validate()
                .map_err(|e| config_err(format!("kinds[{i}]: {e}")))?;
            if self.standard_index >= kind.num_qubits() {
                return Err(config_err(format!(
                    "standard_index: {} out of range for kinds[{i}] = {kind}",
                    self.standard_index
                )));
            }
            for (p, party) in self.parties.iter().enumerate() {
                if party.index >= kind.num_qubits() {
                    return Err(config_err(format!(
                        "parties[{p}].index: {} out of range for kinds[{i}] = {kind}",
                        party.index
                    )));
                }
            }
        }
        for (p, party) in self.parties.iter().enumerate() {
            if party.index == self.standard_index {
                return Err(config_err(format!(
                    "parties[{p}].index: the standard clock cannot be a party"
                )));
            }
            if !party.omega_hz.is_finite() || party.omega_hz < 0.0 {
                return Err(config_err(format!(
                    "parties[{p}].omega_hz: must be finite and ≥ 0"
                )));
            }
            if self.parties[..p].iter().any(|q| q.index == party.index) {
                return Err(config_err(format!(
                    "parties[{p}].index: qubit {} listed twice",
                    party.index
                )));
            }
        }
        if let Some(grid) = &self.delta {
            if grid.count < 1 {
                return Err(config_err("delta.count: must be ≥ 1"));
            }
            if !grid.start_s.is_finite() || !grid.stop_s.is_finite() {
                return Err(config_err("delta: start_s and stop_s must be finite"));
            }
        }
        if self.shots == Some(0) {
            return Err(config_err("shots: must be ≥ 1"));
        }
        if self.trials == Some(0) {
            return Err(config_err("trials: must be ≥ 1"));
        }
        if let Some(table) = &self.table {
            if table.omegas_hz.is_empty() {
                return Err(config_err(
                    "table.omegas_hz: at least one frequency is required",
                ));
            }
            if table.omegas_hz.iter().any(|w| !w.is_finite() || *w <= 0.0) {
                return Err(config_err(
                    "table.omegas_hz: frequencies must be finite and > 0",
                ));
            }
            if !table.phase_rad.is_finite() {
                return Err(config_err("table.phase_rad: must be finite"));
            }
        }
        Ok(())
    }

    /// Angular frequency (rad/s) per qubit; unlisted qubits are idle.
    pub fn clock_omegas(&self, n: usize) -> Vec<f64> {
        let mut omega = vec![0.0; n];
        for p in &self.parties {
            if p.index < n {
                omega[p.index] = 2.0 * PI * p.omega_hz;
            }
        }
        omega
    }
}

/// Named, built-in configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    /// W(4) and Dicke(4,2), Bob at 250 Hz, 20 offsets over 0–5 ms.
    Fig5,
    /// Dicke(4,2) with clocks at 250, 150 and 100 Hz, 20 offsets over 0–5 ms.
    Fig6,
    /// Offset-accuracy grid at 100/150/250 Hz for W(4) and Dicke(4,2).
    Table1,
}

const FIG5: &str = r#"
kinds = [{ kind = "w", n = 4 }, { kind = "dicke", n = 4, k = 2 }]
parties = [{ index = 1, omega_hz = 250.0 }]
delta = { start_s = 0.0, stop_s = 0.005, count = 20 }
"#;

const FIG6: &str = r#"
kinds = [{ kind = "dicke", n = 4, k = 2 }]
parties = [
    { index = 1, omega_hz = 250.0 },
    { index = 2, omega_hz = 150.0 },
    { index = 3, omega_hz = 100.0 },
]
delta = { start_s = 0.0, stop_s = 0.005, count = 20 }
"#;

const TABLE1: &str = r#"
kinds = [{ kind = "w", n = 4 }, { kind = "dicke", n = 4, k = 2 }]
shots = 4096
trials = 200
seed = 2024
table = { omegas_hz = [100.0, 150.0, 250.0] }
"#;

impl Preset {
    pub fn config(self) -> ExperimentConfig {
        let (name, text) = match self {
            Self::Fig5 => ("fig5", FIG5),
            Self::Fig6 => ("fig6", FIG6),
            Self::Table1 => ("table1", TABLE1),
        };
        ExperimentConfig::from_toml_str(text, name).expect("built-in presets are valid")
    }
}

/// On-disk molecule description: shifts in Hz and the row-major upper
/// triangle of the J-coupling matrix in Hz.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoleculeFile {
    pub n: usize,
    pub omega_hz: Vec<f64>,
    pub j_hz: Vec<f64>,
}

impl MoleculeFile {
    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self> {
        let file: Self = toml::from_str(text).map_err(|e| config_err(format!("{origin}: {e}")))?;
        if file.omega_hz.len() != file.n {
            return Err(config_err(format!(
                "{origin}: omega_hz has {} entries, expected n = {}",
                file.omega_hz.len(),
                file.n
            )));
        }
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text, &path.display().to_string())
    }

    pub fn to_spec(&self) -> Result<MoleculeSpec> {
        let omega = self.omega_hz.iter().map(|f| 2.0 * PI * f).collect();
        MoleculeSpec::from_upper_triangle(omega, &self.j_hz)
            .map_err(|e| config_err(format!("molecule: {e}")))
    }
}
