//! Reproducibility record written next to every output set.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: Vec<String>,
    pub subcommand: String,
    /// Fully resolved configuration (defaults filled in).
    pub config: serde_json::Value,
    pub version: String,
    pub seed: Option<u64>,
    pub rng: String,
    pub threads: usize,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
    pub exit_code: i32,
    pub outputs: Vec<PathBuf>,
}

pub fn now_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0)
}

impl RunManifest {
    pub fn start(subcommand: &str, config: serde_json::Value, seed: Option<u64>) -> Self {
        Self {
            command: std::env::args().collect(),
            subcommand: subcommand.into(),
            config,
            version: env!("CARGO_PKG_VERSION").into(),
            seed,
            rng: abi_core::model::RNG_NAME.into(),
            threads: rayon::current_num_threads(),
            started_unix_ms: now_ms(),
            finished_unix_ms: 0,
            exit_code: 0,
            outputs: Vec::new(),
        }
    }

    /// Stamp the end time and write `manifest.json` into `dir`.
    pub fn finish(mut self, dir: &Path, exit_code: i32) -> Result<PathBuf> {
        self.finished_unix_ms = now_ms();
        self.exit_code = exit_code;
        let path = dir.join("manifest.json");
        self.outputs.push(path.clone());
        fs::write(&path, serde_json::to_string_pretty(&self)?)
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)?).with_context(|| format!("writing {}", path.display()))
}
