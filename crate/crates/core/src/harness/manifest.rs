//! Run provenance: what was run, with which seeds, and what it wrote.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::harness::config::ExperimentConfig;
use crate::state::FACTOR_ORDER;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    pub path: PathBuf,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub label: String,
    pub n_sites: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_prime: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    pub seed: u64,
    pub samples: usize,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub software: String,
    pub version: String,
    pub factor_order: String,
    pub threads: usize,
    pub configs: Vec<ExperimentConfig>,
    pub runs: Vec<RunRecord>,
    pub outputs: Vec<OutputFile>,
}

impl Default for RunManifest {
    fn default() -> Self {
        Self::new()
    }
}

impl RunManifest {
    pub fn new() -> Self {
        Self {
            software: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            factor_order: FACTOR_ORDER.to_string(),
            threads: rayon::current_num_threads(),
            configs: Vec::new(),
            runs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    /// Write `contents` to `dir/name` and record its digest.
    pub fn write_output(&mut self, dir: &Path, name: &str, contents: &[u8]) -> Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(name);
        std::fs::write(&path, contents)?;
        self.outputs.push(OutputFile { path: path.clone(), sha256: sha256_hex(contents), bytes: contents.len() });
        Ok(path)
    }

    pub fn merge(&mut self, other: RunManifest) {
        self.configs.extend(other.configs);
        self.runs.extend(other.runs);
        self.outputs.extend(other.outputs);
    }

    /// Write the manifest itself as `dir/manifest.json`.
    pub fn save(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join("manifest.json");
        std::fs::write(&path, serde_json::to_string_pretty(self)?)?;
        Ok(path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    /// Output files whose current content no longer matches the recorded
    /// digest.
    pub fn stale_outputs(&self) -> Result<Vec<PathBuf>> {
        let mut stale = Vec::new();
        for out in &self.outputs {
            match std::fs::read(&out.path) {
                Ok(bytes) if sha256_hex(&bytes) == out.sha256 => {}
                _ => stale.push(out.path.clone()),
            }
        }
        Ok(stale)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
