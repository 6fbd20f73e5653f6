//! Top-level JSON configuration. Every physical quantity carries its unit
//! in the key suffix; unknown keys are rejected at every level. Missing
//! sections, and missing keys directly inside a section, take the built-in
//! defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analog::{BiasLimits, InjectorConfig, VdacStage};
use crate::noise::{DetectorNoiseParams, InjectorNoiseParams};
use crate::patgen::NodeTable;
use crate::pulsegen::Combine;
use crate::qexp::{BiasScanConfig, HistogramConfig, ReadoutSetup, TunnelingModel};
use crate::thermal::{ConductivityTable, ThermalError, ThermalScenario};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("parsing config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("schema_version {found:?} not supported (expected {SCHEMA_VERSION:?})")]
    Schema { found: String },
    #[error("conductivity table: {0}")]
    Table(#[from] ThermalError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GlobalConfig {
    pub schema_version: String,
    pub patgen: PatgenSection,
    pub pulsegen: PulsegenSection,
    pub analog: AnalogSection,
    pub noise: NoiseSection,
    pub detector: ReadoutSetup,
    pub thermal: ThermalSection,
    pub qexp: QexpSection,
}

impl Default for GlobalConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION.into(),
            patgen: PatgenSection::default(),
            pulsegen: PulsegenSection::default(),
            analog: AnalogSection::default(),
            noise: NoiseSection::default(),
            detector: ReadoutSetup::default(),
            thermal: ThermalSection::default(),
            qexp: QexpSection::default(),
        }
    }
}

impl GlobalConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: GlobalConfig = serde_json::from_str(text)?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::Schema {
                found: cfg.schema_version,
            });
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PatgenSection {
    pub node_table: NodeTable,
    /// Execution guard for runaway loops.
    pub max_ticks: u64,
}

impl Default for PatgenSection {
    fn default() -> Self {
        Self {
            node_table: NodeTable::default(),
            max_ticks: 10_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PulsegenSection {
    pub clk_hz: f64,
    pub duration_s: f64,
    pub sel1: u8,
    pub sel2: u8,
    pub combine: Combine,
    pub leaf_index: u8,
    pub jitter_rms_s: f64,
    pub seed: u64,
}

impl Default for PulsegenSection {
    fn default() -> Self {
        Self {
            clk_hz: 2e9,
            duration_s: 32e-9,
            sel1: 0,
            sel2: 4,
            combine: Combine::And,
            leaf_index: 0,
            jitter_rms_s: 0.0,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalogSection {
    pub coarse: VdacStage,
    pub fine: VdacStage,
    pub sequencer_code: u8,
    pub sequencer_clk_hz: f64,
    pub sequencer_pulse_width_s: f64,
    pub limits: BiasLimits,
    pub ramp_target_v: f64,
    pub droop_rate_v_per_s: f64,
    pub hold_s: f64,
    pub injector: InjectorConfig,
}

impl Default for AnalogSection {
    fn default() -> Self {
        Self {
            coarse: VdacStage::default_coarse(),
            fine: VdacStage::default_fine(),
            sequencer_code: 128,
            sequencer_clk_hz: 125e6,
            sequencer_pulse_width_s: 8e-9,
            limits: BiasLimits::default(),
            ramp_target_v: 0.3,
            droop_rate_v_per_s: 5e-3 / 600e-6,
            hold_s: 600e-6,
            injector: InjectorConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseSection {
    pub injector: InjectorNoiseParams,
    pub detector: DetectorNoiseParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThermalSection {
    pub scenario: ThermalScenario,
    /// CSV with columns `t_k,k_w_per_mk`; the bundled copper table when absent.
    pub conductivity_csv: Option<String>,
    pub multipliers: Vec<f64>,
}

impl Default for ThermalSection {
    fn default() -> Self {
        Self {
            scenario: ThermalScenario::default(),
            conductivity_csv: None,
            multipliers: vec![1.0, 2.0, 5.0, 10.0],
        }
    }
}

impl ThermalSection {
    pub fn table(&self) -> Result<ConductivityTable, ConfigError> {
        match &self.conductivity_csv {
            None => Ok(ConductivityTable::default()),
            Some(p) => {
                let f = std::fs::File::open(p).map_err(|source| ConfigError::Io {
                    path: p.clone(),
                    source,
                })?;
                Ok(ConductivityTable::from_csv(f, p.clone())?)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QexpSection {
    pub model: TunnelingModel,
    pub histogram: HistogramConfig,
    pub trials: usize,
    pub seed: u64,
    pub step_v: f64,
    pub sweep_start_v: f64,
    pub sweep_stop_v: f64,
    pub sweep_points: usize,
    pub acf_max_lag: usize,
    pub bias_scan: BiasScanConfig,
    pub c_dot_f: f64,
    pub gate_swing_v: f64,
}

impl Default for QexpSection {
    fn default() -> Self {
        Self {
            model: TunnelingModel::default(),
            histogram: HistogramConfig::default(),
            trials: 10_000,
            seed: 2024,
            step_v: 78e-3,
            sweep_start_v: 33e-3,
            sweep_stop_v: 78e-3,
            sweep_points: 10,
            acf_max_lag: 20,
            bias_scan: BiasScanConfig::default(),
            c_dot_f: 35e-18,
            gate_swing_v: 45e-3,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips() {
        let cfg = GlobalConfig::default();
        assert_eq!(GlobalConfig::from_json(&cfg.to_json()).unwrap(), cfg);
    }

    #[test]
    fn partial_config_fills_defaults() {
        let cfg = GlobalConfig::from_json(r#"{"schema_version":"1","qexp":{"seed":9}}"#).unwrap();
        assert_eq!(cfg.qexp.seed, 9);
        assert_eq!(cfg.qexp.trials, 10_000);
    }

    #[test]
    fn unknown_keys_rejected() {
        for text in [
            r#"{"schema_version":"1","bogus":1}"#,
            r#"{"qexp":{"seed":1,"sed":2}}"#,
            r#"{"detector":{"detector":{"gain":1}}}"#,
            r#"{"analog":{"limits":{"v_th":0.3}}}"#,
        ] {
            assert!(matches!(GlobalConfig::from_json(text), Err(ConfigError::Parse(_))), "{text}");
        }
    }

    #[test]
    fn wrong_schema_rejected() {
        assert!(matches!(
            GlobalConfig::from_json(r#"{"schema_version":"0"}"#),
            Err(ConfigError::Schema { .. })
        ));
    }
}
