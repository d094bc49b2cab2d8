//! Run configuration.
//!
//! TOML with namespaced keys, either as tables or as dotted keys
//! (`scenario.lambda = 6.68`). Every key except `location.*` and `time.*`
//! has a default. Data paths are resolved relative to the config file;
//! absent paths select the tables compiled into the simulator.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use hfsim_core::allocations::AMATEUR_INDICES;
use hfsim_core::congestion::{DEFAULT_ANTENNA_FACTOR_DB, DEFAULT_LOAD_OHMS};
use hfsim_core::scenario::{DEFAULT_LAMBDA, DEFAULT_MEAN_DURATION};
use hfsim_core::synth::{ModulationKind, DEFAULT_CENTER_FREQUENCY, DEFAULT_DECIMATION, DEFAULT_RF_SAMPLE_RATE};
use hfsim_core::{OutputMode, Regime};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Validity window of the congestion model around midday or midnight.
pub const REGIME_WINDOW_S: f64 = 3.0 * 3600.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub data: DataPaths,
    pub location: Location,
    pub time: TimeSpec,
    #[serde(default)]
    pub scenario: ScenarioSection,
    #[serde(default)]
    pub receiver: Receiver,
    #[serde(default)]
    pub output: Output,
    #[serde(default)]
    pub run: Run,
    #[serde(default)]
    pub modulation: Modulation,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataPaths {
    pub allocations: Option<PathBuf>,
    pub coefficients: Option<PathBuf>,
    pub ssn: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Location {
    pub latitude: f64,
    pub longitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    pub year: i32,
    pub month: u32,
    pub week: u32,
    pub regime: Regime,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioSection {
    pub allocations: Vec<u32>,
    pub lambda: f64,
    pub mean_duration: f64,
    pub total_time: f64,
    pub seed: u64,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        Self {
            allocations: AMATEUR_INDICES.to_vec(),
            lambda: DEFAULT_LAMBDA,
            mean_duration: DEFAULT_MEAN_DURATION,
            total_time: 16.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Receiver {
    /// Hz.
    pub bandwidth: f64,
    /// dB/m.
    pub antenna_factor: f64,
    /// Ohms.
    pub load_resistance: f64,
}

impl Default for Receiver {
    fn default() -> Self {
        Self { bandwidth: 100.0, antenna_factor: DEFAULT_ANTENNA_FACTOR_DB, load_resistance: DEFAULT_LOAD_OHMS }
    }
}

/// How baseband output is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Chain {
    /// Synthesize baseband directly.
    Direct,
    /// Synthesize RF, then down-convert and decimate.
    Ddc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Output {
    pub mode: OutputMode,
    /// Baseband only.
    pub chain: Chain,
    /// Output rate; defaults depend on mode and chain.
    pub sample_rate: Option<f64>,
    pub center_frequency: f64,
    /// RF rate of the `ddc` chain.
    pub rf_sample_rate: f64,
    pub decimation: usize,
    /// Samples per synthesized block.
    pub block_size: usize,
}

impl Default for Output {
    fn default() -> Self {
        Self {
            mode: OutputMode::Baseband,
            chain: Chain::Direct,
            sample_rate: None,
            center_frequency: DEFAULT_CENTER_FREQUENCY,
            rf_sample_rate: DEFAULT_RF_SAMPLE_RATE,
            decimation: DEFAULT_DECIMATION,
            block_size: 1 << 20,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Run {
    /// Worker threads; 0 uses every core.
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Modulation {
    pub default: String,
    /// Allocation index → modulation tag.
    pub allocations: BTreeMap<String, String>,
}

impl Default for Modulation {
    fn default() -> Self {
        Self { default: ModulationKind::CwMorse.to_string(), allocations: BTreeMap::new() }
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::config(e.to_string()))
    }

    /// Read a config file; returns it with the directory data paths are
    /// relative to.
    pub fn load(path: &Path) -> Result<(Self, PathBuf), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        let config = Self::parse(&text).map_err(|e| CliError::config(format!("{}: {}", path.display(), e.message)))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((config, base))
    }

    /// Modulation for every selected allocation.
    pub fn modulation_map(&self) -> Result<BTreeMap<u32, ModulationKind>, CliError> {
        let default: ModulationKind = self.modulation.default.parse().map_err(CliError::config)?;
        let mut map: BTreeMap<u32, ModulationKind> =
            self.scenario.allocations.iter().map(|&k| (k, default)).collect();
        for (key, tag) in &self.modulation.allocations {
            let k: u32 = key
                .trim()
                .parse()
                .map_err(|_| CliError::config(format!("modulation key `{key}` is not an allocation index")))?;
            if !map.contains_key(&k) {
                return Err(CliError::config(format!("modulation set for allocation {k}, which is not simulated")));
            }
            map.insert(k, tag.parse().map_err(CliError::config)?);
        }
        Ok(map)
    }

    /// Checks not covered by the core scenario validation.
    pub fn validate(&self) -> Result<(), CliError> {
        if !(1..=12).contains(&self.time.month) {
            return Err(CliError::config(format!("time.month {} not in 1..=12", self.time.month)));
        }
        let o = &self.output;
        if o.block_size == 0 {
            return Err(CliError::config("output.block_size must be positive"));
        }
        if o.decimation == 0 {
            return Err(CliError::config("output.decimation must be at least 1"));
        }
        if let Some(fs) = o.sample_rate {
            if !(fs > 0.0 && fs.is_finite()) {
                return Err(CliError::config(format!("output.sample_rate {fs} must be positive")));
            }
        }
        if !(o.rf_sample_rate > 0.0 && o.rf_sample_rate.is_finite()) {
            return Err(CliError::config(format!("output.rf_sample_rate {} must be positive", o.rf_sample_rate)));
        }
        self.modulation_map()?;
        Ok(())
    }

    pub fn resolve_path(base: &Path, p: &Option<PathBuf>) -> Option<PathBuf> {
        p.as_ref().map(|p| if p.is_absolute() { p.clone() } else { base.join(p) })
    }
}
