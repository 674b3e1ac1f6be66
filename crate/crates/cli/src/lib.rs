//! File formats and command implementations for the self-assembly toolkit
//! binary: scenario/config/graph loading, pipeline stages, output emission.

pub mod output;
pub mod svg;

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use assembly_core::assignment::Mapping;
use assembly_core::config::{Config, PartialConfig};
use assembly_core::scenario::Scenario;
use assembly_core::scheduler::ReconfigurationAction;
use assembly_core::topology::ConfigGraph;

/// Errors split by exit code: validation failures exit 1, runtime failures
/// (execution or output problems) exit 2.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(msg) => write!(f, "validation failure: {msg}"),
            CliError::Runtime(msg) => write!(f, "runtime failure: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))
}

/// Parse and validate a scenario file; the returned config has the scenario's
/// own overrides applied (apply a `--config` file on top afterwards).
pub fn load_scenario(path: &Path) -> Result<(Scenario, Config), CliError> {
    let text = read(path)?;
    let scenario: Scenario = serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    let config = scenario.apply_overrides(Config::default());
    Ok((scenario, config))
}

/// Validate a scenario against its effective config, mapping issues to a
/// validation failure listing every field path.
pub fn validate_scenario(scenario: &Scenario, config: &Config) -> Result<(), CliError> {
    scenario
        .validate(config)
        .map_err(|issues| CliError::Validation(format!("{issues}")))
}

/// Load a `--config` TOML file with `[motion]` / `[sim]` override sections.
pub fn load_config_overrides(path: &Path) -> Result<PartialConfig, CliError> {
    let text = read(path)?;
    toml::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

/// Load a configuration graph JSON document.
pub fn load_graph(path: &Path) -> Result<ConfigGraph, CliError> {
    let text = read(path)?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

/// Reconfiguration input: the goal-vertex-to-module mapping plus the
/// sequential dock/undock pairs to parallelize.
#[derive(Debug, serde::Serialize, serde::Deserialize)]
pub struct ReconfigActionsFile {
    /// Goal vertex id -> physical module id.
    pub mapping: BTreeMap<assembly_core::topology::ModuleId, assembly_core::topology::ModuleId>,
    pub actions: Vec<ReconfigurationAction>,
}

pub fn load_reconfig_actions(
    path: &Path,
) -> Result<(Mapping, Vec<ReconfigurationAction>), CliError> {
    let text = read(path)?;
    let file: ReconfigActionsFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    Ok((
        Mapping {
            target_to_module: file.mapping,
            cost_m: 0.0,
        },
        file.actions,
    ))
}
