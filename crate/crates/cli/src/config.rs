//! Versioned JSON configuration files. Unknown keys are rejected.

use std::path::Path;

use abi_core::sim::{DispersionConfig, SimConfig};
use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

pub const SIMULATE_SCHEMA: &str = "abi-simulate/1";
pub const DECAY_SCHEMA: &str = "abi-decay/1";

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Snapshot every this many diagnostic samples; 0 keeps only the initial
    /// and final fields.
    #[serde(default)]
    pub snapshot_every: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateFile {
    pub schema: String,
    #[serde(default)]
    pub simulation: SimConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct U0ProbeConfig {
    #[serde(default)]
    pub simulation: SimConfig,
    pub amplitude: f64,
}

fn default_window() -> [f64; 2] {
    [-1.2, -0.8]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayFile {
    pub schema: String,
    #[serde(default)]
    pub dispersion: Option<DispersionConfig>,
    #[serde(default)]
    pub u0: Option<U0ProbeConfig>,
    /// Accepted range of the fitted sup-norm exponent.
    #[serde(default = "default_window")]
    pub window: [f64; 2],
    /// Accepted range of the u0 amplitude quotient.
    #[serde(default = "default_quotient_window")]
    pub quotient_window: [f64; 2],
}

fn default_quotient_window() -> [f64; 2] {
    [1.5, 2.5]
}

pub trait Schema {
    const SCHEMA: &'static str;
    fn schema(&self) -> &str;
}

impl Schema for SimulateFile {
    const SCHEMA: &'static str = SIMULATE_SCHEMA;
    fn schema(&self) -> &str {
        &self.schema
    }
}

impl Schema for DecayFile {
    const SCHEMA: &'static str = DECAY_SCHEMA;
    fn schema(&self) -> &str {
        &self.schema
    }
}

/// Parse a config file, or the `config` member of a manifest written by a
/// previous run.
pub fn parse_config<T: DeserializeOwned + Schema>(text: &str) -> Result<T> {
    let mut value: serde_json::Value = serde_json::from_str(text).context("config is not valid JSON")?;
    if let Some(obj) = value.as_object_mut() {
        if obj.contains_key("subcommand") {
            value = obj.remove("config").context("manifest has no config member")?;
        }
    }
    let cfg: T = serde_json::from_value(value).context("config does not match the schema")?;
    if cfg.schema() != T::SCHEMA {
        bail!("unsupported schema {:?}, expected {:?}", cfg.schema(), T::SCHEMA);
    }
    Ok(cfg)
}

pub fn load_config<T: DeserializeOwned + Schema>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_config(&text).with_context(|| format!("in {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_and_wrong_schema_are_rejected() {
        assert!(parse_config::<SimulateFile>(r#"{"schema":"abi-simulate/1","simulation":{"n":8,"bogus":1}}"#).is_err());
        assert!(parse_config::<SimulateFile>(r#"{"schema":"abi-simulate/1","extra":0}"#).is_err());
        assert!(parse_config::<SimulateFile>(r#"{"schema":"abi-simulate/9"}"#).is_err());
        let ok = parse_config::<SimulateFile>(r#"{"schema":"abi-simulate/1","simulation":{"n":8}}"#).unwrap();
        assert_eq!(ok.simulation.n, 8);
    }

    #[test]
    fn manifest_config_member_is_accepted() {
        let text = r#"{"subcommand":"simulate","config":{"schema":"abi-simulate/1","simulation":{"n":12}}}"#;
        assert_eq!(parse_config::<SimulateFile>(text).unwrap().simulation.n, 12);
    }

    #[test]
    fn decay_defaults() {
        let d = parse_config::<DecayFile>(r#"{"schema":"abi-decay/1","dispersion":{}}"#).unwrap();
        assert_eq!(d.window, [-1.2, -0.8]);
        assert_eq!(d.dispersion.unwrap().n, 128);
    }
}
