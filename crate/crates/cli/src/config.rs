//! JSON scenario configuration.
//!
//! The schema is strict on purpose: a silently ignored typo in a physics
//! parameter is worse than a parse error, so unknown keys are rejected
//! everywhere and the schema version is checked before anything runs.

use serde::{Deserialize, Serialize};
use sgdl_core::atom::AtomSpec;
use sgdl_core::dynamics::{GridSpec, HamiltonianSpec};
use sgdl_core::suite::DEFAULT_SEED;
use std::path::PathBuf;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default)]
    pub csv_path: Option<PathBuf>,
    #[serde(default)]
    pub json_path: Option<PathBuf>,
    #[serde(default)]
    pub svg_path: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub name: String,
    /// Beam atom giving the scenario its physical context.  A one-nucleon
    /// atom cannot carry an internal environment, and configs that pair it
    /// with an active one are rejected.
    #[serde(default)]
    pub atom: Option<AtomSpec>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub hamiltonian: Option<HamiltonianSpec>,
    #[serde(default)]
    pub outputs: Outputs,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        let cfg: ScenarioConfig =
            serde_json::from_str(text).map_err(|e| format!("config does not parse: {e}"))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(format!(
                "unsupported schema_version {}, this build reads {SCHEMA_VERSION}",
                cfg.schema_version
            ));
        }
        if cfg.name.trim().is_empty() {
            return Err("scenario name must be nonempty".into());
        }
        Ok(cfg)
    }
}
