//! Tool configuration: one JSON file with a section per subsystem.
//!
//! Every field has a default equal to the reference operating point, so an
//! empty file (or no file at all) runs the reference setup. Durations
//! accept plain numbers (seconds) or strings with an explicit unit suffix
//! ("300s", "5min"); they are stored in seconds.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize};

use qkdrb_core::ring::ChordMode;
use qkdrb_core::sim::SimConfig;
use qkdrb_core::skr::{self, DecoyParams, GenerationModel, SaturationClamp};
use qkdrb_core::switched::SwitchedConfig;

pub type ConfigError = Box<dyn std::error::Error>;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ToolConfig {
    pub model: ModelSection,
    pub scenario: ScenarioSection,
    pub switched: SwitchedSection,
    pub sim: SimSection,
}

impl ToolConfig {
    /// Loads from `path`, else from `$QKDRB_CONFIG`, else the defaults.
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        let path: Option<PathBuf> = path
            .map(PathBuf::from)
            .or_else(|| std::env::var_os("QKDRB_CONFIG").map(PathBuf::from));
        let config = match path {
            Some(path) => {
                let text = fs::read_to_string(&path)
                    .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
                serde_json::from_str::<ToolConfig>(&text)
                    .map_err(|e| format!("bad config {}: {e}", path.display()))?
            }
            None => ToolConfig::default(),
        };
        config.validate()?;
        Ok(config)
    }

    /// Validates every section against its owning module's invariants.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.build_model()?;
        self.switched_config().validate()?;
        if self.scenario.attenuation_db_per_km.is_nan() || self.scenario.attenuation_db_per_km < 0.0
        {
            return Err(format!(
                "scenario.attenuation_db_per_km must be non-negative, got {}",
                self.scenario.attenuation_db_per_km
            )
            .into());
        }
        if let Some(bits) = self.sim.block_bits {
            if bits == 0 || bits % 8 != 0 {
                return Err(
                    format!("sim.block_bits must be a positive multiple of 8, got {bits}").into()
                );
            }
        }
        Ok(())
    }

    pub fn build_model(&self) -> Result<GenerationModel, ConfigError> {
        let clamp = SaturationClamp::new(self.model.tx_power_dbm, self.model.max_rx_power_dbm)?;
        let model = match self.model.kind {
            ModelKindConfig::Parametric => {
                GenerationModel::parametric(self.model.params.clone(), clamp)?
            }
            ModelKindConfig::Table => {
                let path = self.model.table_csv.as_ref().ok_or_else(|| {
                    "model.kind is \"table\" but model.table_csv is not set".to_string()
                })?;
                let text = fs::read_to_string(path)
                    .map_err(|e| format!("cannot read table {}: {e}", path.display()))?;
                GenerationModel::from_table(skr::parse_table_csv(&text)?, clamp)?
            }
        };
        Ok(model)
    }

    pub fn switched_config(&self) -> SwitchedConfig {
        SwitchedConfig {
            switch_loss_db: self.switched.switch_loss_db,
            pairing_penalty_db: self.switched.pairing_penalty_db,
            reconfig_time_s: self.switched.reconfig_time_s,
            period_s: self.switched.period_s,
        }
    }

    /// Effective configuration as JSON; reloading it reproduces the run.
    #[allow(dead_code)]
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKindConfig {
    Parametric,
    Table,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelSection {
    pub kind: ModelKindConfig,
    /// Decoy-state parameters (parametric kind).
    pub params: DecoyParams,
    /// Two-column `attenuation_db,skr_bps` CSV (table kind), resolved
    /// relative to the working directory.
    pub table_csv: Option<PathBuf>,
    pub tx_power_dbm: f64,
    pub max_rx_power_dbm: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            kind: ModelKindConfig::Parametric,
            params: DecoyParams::default(),
            table_csv: None,
            tx_power_dbm: 0.0,
            max_rx_power_dbm: -6.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioSection {
    pub attenuation_db_per_km: f64,
    pub chord_mode: ChordMode,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        Self { attenuation_db_per_km: 0.24, chord_mode: ChordMode::Circle }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SwitchedSection {
    pub switch_loss_db: f64,
    pub pairing_penalty_db: f64,
    #[serde(deserialize_with = "de_duration")]
    pub reconfig_time_s: f64,
    #[serde(deserialize_with = "de_duration")]
    pub period_s: f64,
}

impl Default for SwitchedSection {
    fn default() -> Self {
        let reference = SwitchedConfig::reference();
        Self {
            switch_loss_db: reference.switch_loss_db,
            pairing_penalty_db: reference.pairing_penalty_db,
            reconfig_time_s: reference.reconfig_time_s,
            period_s: reference.period_s,
        }
    }
}

/// Simulation section. `block_bits`, `warmup_s` and `measure_s` may be left
/// null: `simulate` then derives values sized to the scenario (documented
/// in the README) so default runs stay tractable at the reference period.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SimSection {
    pub block_bits: Option<usize>,
    #[serde(deserialize_with = "de_opt_duration")]
    pub warmup_s: Option<f64>,
    #[serde(deserialize_with = "de_opt_duration")]
    pub measure_s: Option<f64>,
    pub seed: u64,
}

impl Default for SimSection {
    fn default() -> Self {
        Self { block_bits: None, warmup_s: None, measure_s: None, seed: 7 }
    }
}

impl SimSection {
    pub fn resolve_relayed(&self, analytic_bps: f64, demand_bps: f64) -> Result<SimConfig, ConfigError> {
        let warmup_s = self.warmup_s.unwrap_or(30.0);
        let measure_s = self.measure_s.unwrap_or(3.0 * warmup_s.max(10.0));
        let block_bits = match self.block_bits {
            Some(bits) => bits,
            // Keep the block below 1% of the key volume generated per pair
            // during warmup so quantization cannot mask the steady state.
            None => auto_block_bits(analytic_bps * warmup_s / 200.0, analytic_bps * warmup_s / 100.0),
        };
        Ok(SimConfig {
            block_bits,
            warmup_s,
            measure_s,
            consumption_rate_bps: demand_bps,
            seed: self.seed,
        })
    }

    pub fn resolve_switched(
        &self,
        analytic_bps: f64,
        demand_bps: f64,
        period_s: f64,
    ) -> Result<SimConfig, ConfigError> {
        let warmup_s = self.warmup_s.unwrap_or(2.0 * period_s);
        let measure_s = self.measure_s.unwrap_or_else(|| {
            let base = 3.0 * period_s;
            if demand_bps > analytic_bps {
                // Over-subscription drains the pre-charge buffer by
                // (demand - analytic) * T per period; run long enough to see
                // the pools actually hit bottom, capped at 50 periods.
                let horizon =
                    period_s * analytic_bps / (demand_bps - analytic_bps) + 2.0 * period_s;
                (base + horizon).min(50.0 * period_s)
            } else {
                base
            }
        });
        let block_bits = match self.block_bits {
            Some(bits) => bits,
            None => auto_block_bits(analytic_bps * period_s / 2000.0, analytic_bps * period_s / 100.0),
        };
        Ok(SimConfig {
            block_bits,
            warmup_s,
            measure_s,
            consumption_rate_bps: demand_bps,
            seed: self.seed,
        })
    }
}

/// Power of two near `target`, at least 256 and at most `ceiling` (when the
/// ceiling itself allows 256).
fn auto_block_bits(target: f64, ceiling: f64) -> usize {
    let mut bits: usize = 256;
    while (bits as f64) < target && (2 * bits) as f64 <= ceiling {
        bits *= 2;
    }
    bits
}

/// Parses a duration: plain seconds, or a number with "s"/"sec"/"min" suffix.
pub fn parse_duration_s(text: &str) -> Result<f64, ConfigError> {
    let text = text.trim();
    let (number, scale) = if let Some(rest) = text.strip_suffix("min") {
        (rest, 60.0)
    } else if let Some(rest) = text.strip_suffix("sec") {
        (rest, 1.0)
    } else if let Some(rest) = text.strip_suffix('s') {
        (rest, 1.0)
    } else {
        (text, 1.0)
    };
    let value: f64 = number
        .trim()
        .parse()
        .map_err(|_| format!("bad duration {text:?}: expected seconds or \"<n>min\""))?;
    if value.is_nan() || value < 0.0 {
        return Err(format!("bad duration {text:?}: negative").into());
    }
    Ok(value * scale)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum DurationRepr {
    Seconds(f64),
    Text(String),
}

fn de_duration<'de, D: Deserializer<'de>>(de: D) -> Result<f64, D::Error> {
    match DurationRepr::deserialize(de)? {
        DurationRepr::Seconds(s) => Ok(s),
        DurationRepr::Text(text) => parse_duration_s(&text).map_err(serde::de::Error::custom),
    }
}

fn de_opt_duration<'de, D: Deserializer<'de>>(de: D) -> Result<Option<f64>, D::Error> {
    let value = Option::<DurationRepr>::deserialize(de)?;
    match value {
        None => Ok(None),
        Some(DurationRepr::Seconds(s)) => Ok(Some(s)),
        Some(DurationRepr::Text(text)) => {
            parse_duration_s(&text).map(Some).map_err(serde::de::Error::custom)
        }
    }
}
