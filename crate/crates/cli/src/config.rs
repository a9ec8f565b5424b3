//! Device description files: a JSON document with `snail`, `array` and
//! `resonator` sections in SI units plus optional metadata. Unknown keys are
//! rejected; the matching JSON Schema ships as `docs/device-config.schema.json`.

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use arraymode::{modes, ArraySpec, DeviceModel, ResonatorSpec, SnailSpec};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Small-junction ratio assumed when a config omits `snail.alpha`.
pub const DEFAULT_ALPHA: f64 = 0.1;
/// Fundamental-mode frequency the leads are sized for when no arm length is
/// given [Hz].
pub const DEFAULT_DESIGN_FREQUENCY: f64 = 8e9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
    pub snail: SnailConfig,
    pub array: ArrayConfig,
    pub resonator: ResonatorConfig,
}

/// Exactly one of the two inductances must be given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnailConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Large-junction inductance `L_J` [H].
    #[serde(default, rename = "junction_inductance_H", skip_serializing_if = "Option::is_none")]
    pub junction_inductance: Option<f64>,
    /// Zero-flux linear inductance per cell `L_S` [H].
    #[serde(default, rename = "linear_inductance_H", skip_serializing_if = "Option::is_none")]
    pub linear_inductance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrayConfig {
    pub cells: u32,
    #[serde(default = "unit_length", rename = "cell_length_m")]
    pub cell_length: f64,
    #[serde(rename = "ground_capacitance_F")]
    pub ground_capacitance: f64,
    #[serde(rename = "shunt_capacitance_F")]
    pub shunt_capacitance: f64,
    #[serde(default)]
    pub flux_frac: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonatorConfig {
    #[serde(rename = "impedance_ohm")]
    pub impedance: f64,
    #[serde(rename = "phase_velocity_m_per_s")]
    pub phase_velocity: f64,
    /// Length of each lead [m]; sized to `design_frequency_Hz` when absent.
    #[serde(default, rename = "arm_length_m", skip_serializing_if = "Option::is_none")]
    pub arm_length: Option<f64>,
    #[serde(default, rename = "design_frequency_Hz", skip_serializing_if = "Option::is_none")]
    pub design_frequency: Option<f64>,
}

fn unit_length() -> f64 {
    1.0
}

/// A parsed config together with the path it came from and any defaults it
/// relied on.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub path: PathBuf,
    pub config: DeviceConfig,
    pub array: ArraySpec,
    pub warnings: Vec<String>,
}

impl DeviceConfig {
    pub fn from_json(text: &str, path: &Path) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config { path: path.to_path_buf(), message: e.to_string() })
    }

    pub fn load(path: &Path) -> Result<LoadedConfig> {
        let text =
            std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })?;
        Self::from_json(&text, path)?.resolve(path)
    }

    /// Checks cross-field rules and builds the array description.
    pub fn resolve(self, path: &Path) -> Result<LoadedConfig> {
        let invalid = |message: String| CliError::Config { path: path.to_path_buf(), message };
        let mut warnings = Vec::new();
        let alpha = match self.snail.alpha {
            Some(a) => a,
            None => {
                warnings.push(format!("snail.alpha not given; assuming {DEFAULT_ALPHA}"));
                DEFAULT_ALPHA
            }
        };
        let snail = match (self.snail.junction_inductance, self.snail.linear_inductance) {
            (Some(l_j), None) => SnailSpec::new(alpha, l_j),
            (None, Some(l_s)) => SnailSpec::from_linear_inductance(alpha, l_s),
            _ => {
                return Err(invalid(
                    "snail needs exactly one of `junction_inductance_H` and `linear_inductance_H`".into(),
                ))
            }
        }
        .map_err(|e| invalid(e.to_string()))?;
        let array = ArraySpec {
            cells: self.array.cells,
            cell_length: self.array.cell_length,
            ground_capacitance: self.array.ground_capacitance,
            shunt_capacitance: self.array.shunt_capacitance,
            snail,
            flux_frac: self.array.flux_frac,
        };
        array.validate().map_err(|e| invalid(e.to_string()))?;
        if !(0.0..0.5).contains(&self.array.flux_frac) {
            return Err(invalid(format!("array.flux_frac must lie in [0, 0.5), got {}", self.array.flux_frac)));
        }
        let lead = ResonatorSpec {
            impedance: self.resonator.impedance,
            phase_velocity: self.resonator.phase_velocity,
            arm_length: self.resonator.arm_length.unwrap_or(0.0),
        };
        lead.validate().map_err(|e| invalid(e.to_string()))?;
        if let Some(f) = self.resonator.design_frequency {
            if !(f.is_finite() && f > 0.0) {
                return Err(invalid(format!("resonator.design_frequency_Hz must be > 0, got {f}")));
            }
        }
        Ok(LoadedConfig { path: path.to_path_buf(), config: self, array, warnings })
    }
}

impl LoadedConfig {
    /// Design frequency [Hz]: the override if given, else the config's.
    pub fn design_frequency(&self, op_freq: Option<f64>) -> f64 {
        op_freq.or(self.config.resonator.design_frequency).unwrap_or(DEFAULT_DESIGN_FREQUENCY)
    }

    /// Device with `cells` cells whose leads are sized for `frequency` [Hz]
    /// (zero length once the array alone resonates below it).
    pub fn designed(&self, cells: u32, frequency: f64) -> Result<DeviceModel> {
        let r = &self.config.resonator;
        Ok(modes::design_for_frequency(TAU * frequency, self.array.with_cells(cells), r.impedance, r.phase_velocity)?)
    }

    /// The configured device: explicit arm length if given, otherwise sized
    /// for the design frequency.
    pub fn device(&self, op_freq: Option<f64>) -> Result<DeviceModel> {
        let r = &self.config.resonator;
        match (r.arm_length, op_freq) {
            (Some(arm_length), None) => Ok(DeviceModel::new(
                self.array,
                ResonatorSpec { impedance: r.impedance, phase_velocity: r.phase_velocity, arm_length },
            )?),
            _ => self.designed(self.array.cells, self.design_frequency(op_freq)),
        }
    }
}
