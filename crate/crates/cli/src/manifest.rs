//! Run manifest: everything needed to regenerate a run's sample file
//! without re-sampling the scenario.

use std::collections::BTreeMap;
use std::path::Path;

use hfsim_core::{InterferenceParams, OutputMode, Regime};
use serde::{Deserialize, Serialize};

use crate::config::{Chain, Config};
use crate::error::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const SOFTWARE: &str = env!("CARGO_PKG_NAME");
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Values looked up or derived from the config and data files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Resolved {
    pub ssn: f64,
    pub year: i32,
    pub month: u32,
    pub week: u32,
    pub regime: Regime,
    pub allocations: Vec<u32>,
    pub modulation: BTreeMap<u32, String>,
}

/// How the sample file is produced from the interferer table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthPlan {
    pub mode: OutputMode,
    pub chain: Chain,
    /// Rate of the written samples, Hz.
    pub sample_rate: f64,
    pub center_frequency: f64,
    /// Synthesis rate of the `ddc` chain.
    pub rf_sample_rate: Option<f64>,
    pub decimation: usize,
    pub duration: f64,
    pub total_samples: u64,
    pub block_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub software: String,
    pub version: String,
    pub seed: u64,
    /// Config as run, after command-line overrides.
    pub config: Config,
    pub resolved: Resolved,
    pub synthesis: SynthPlan,
    pub sample_file: String,
    pub interferers: Vec<InterferenceParams>,
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self).map_err(|e| CliError::runtime(e.to_string()))?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read manifest {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
    }
}
