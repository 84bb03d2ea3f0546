use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{ExperimentConfig, OutputFormat};
use crate::ambit_sim::PhaseTimings;
use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Shape of every impulse-response export in a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridShape {
    pub time_steps: usize,
    pub delay_bins: usize,
    pub dt_s: f64,
    pub dtau_s: f64,
}

/// Output files of one realization of one engine, relative to the run
/// directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizationRecord {
    pub index: usize,
    pub seed: u64,
    pub engine: String,
    pub impulse_response: String,
    pub power_trace: String,
    pub gain_trace: String,
    /// Engine compute time.
    pub seconds: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phases: Option<PhaseTimings>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub toolkit_version: String,
    pub config_sha256: String,
    pub config: ExperimentConfig,
    pub base_seed: u64,
    pub seeds: Vec<u64>,
    pub engines: Vec<String>,
    pub format: OutputFormat,
    pub workers: usize,
    pub grid: GridShape,
    pub realizations: Vec<RealizationRecord>,
    /// Every file the run wrote, relative to the run directory, except the
    /// manifest itself.
    pub files: Vec<String>,
}

/// SHA-256 of the config's canonical JSON encoding.
pub fn config_hash(config: &ExperimentConfig) -> Result<String> {
    let bytes = serde_json::to_vec(config)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn save(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(MANIFEST_FILE);
        std::fs::write(&path, serde_json::to_string_pretty(self)?)?;
        Ok(path)
    }

    /// Fails with the full list of inventory entries absent under `dir`.
    pub fn check_inventory(&self, dir: &Path) -> Result<()> {
        let missing: Vec<PathBuf> = self
            .files
            .iter()
            .map(|f| dir.join(f))
            .filter(|p| !p.is_file())
            .collect();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(Error::MissingArtifacts(missing))
        }
    }

    /// Records of one engine in realization order.
    pub fn records_for<'a>(&'a self, engine: &'a str) -> impl Iterator<Item = &'a RealizationRecord> + 'a {
        self.realizations.iter().filter(move |r| r.engine == engine)
    }
}
