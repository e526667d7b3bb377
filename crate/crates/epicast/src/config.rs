//! TOML run configuration and hyperparameter grid files.
//!
//! ```toml
//! [data]
//! input = "data/iran_covid19.csv"
//! target = ["confirmed", "deaths"]
//!
//! [run]
//! models = ["arima", "lstm"]
//! horizon = 180
//! seed = 0
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use epicast_core::{Hyperparameters, ModelKind, Target};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(String),
    Many(Vec<String>),
}

impl OneOrMany {
    pub fn into_vec(self) -> Vec<String> {
        match self {
            OneOrMany::One(s) => vec![s],
            OneOrMany::Many(v) => v,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub input: Option<PathBuf>,
    pub target: Option<OneOrMany>,
    pub allow_corrections: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub models: Option<OneOrMany>,
    pub grid: Option<String>,
    pub horizon: Option<usize>,
    pub test_fraction: Option<f64>,
    pub validation_fraction: Option<f64>,
    pub seed: Option<u64>,
    pub seeds: Option<usize>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub data: DataSection,
    #[serde(default)]
    pub run: RunSection,
}

impl ConfigFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = read_existing(path, "config file")?;
        toml::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
    }
}

/// Where grid-search candidates come from.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GridChoice {
    /// The built-in search space of each model kind.
    Default,
    File(PathBuf),
}

impl GridChoice {
    pub fn parse(s: &str) -> Self {
        if s.eq_ignore_ascii_case("default") {
            GridChoice::Default
        } else {
            GridChoice::File(PathBuf::from(s))
        }
    }
}

/// Effective settings of one invocation after merging defaults, the config
/// file and flags. Serialized into every metadata sidecar.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub input: PathBuf,
    pub targets: Vec<Target>,
    pub models: Vec<ModelKind>,
    pub grid: Option<GridChoice>,
    pub horizon: usize,
    pub test_fraction: f64,
    pub validation_fraction: f64,
    pub seed: u64,
    /// Number of refit seeds for the neural models in a backtest.
    pub seeds: usize,
    pub out: PathBuf,
    pub allow_corrections: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridFile {
    candidate: Vec<Hyperparameters>,
}

/// Reads `[[candidate]]` tables, each tagged with its `kind`.
pub fn load_grid(path: &Path) -> CliResult<Vec<Hyperparameters>> {
    let text = read_existing(path, "grid file")?;
    let grid: GridFile = toml::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    if grid.candidate.is_empty() {
        return Err(CliError::usage(format!("{}: no candidates", path.display())));
    }
    for (i, h) in grid.candidate.iter().enumerate() {
        h.validate()
            .map_err(|e| CliError::usage(format!("{}: candidate {}: {e}", path.display(), i + 1)))?;
    }
    Ok(grid.candidate)
}

fn read_existing(path: &Path, what: &str) -> CliResult<String> {
    if !path.exists() {
        return Err(CliError::usage(format!("{what} {} does not exist", path.display())));
    }
    fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

pub fn parse_targets(items: &[String]) -> CliResult<Vec<Target>> {
    let mut out = Vec::new();
    for item in items.iter().flat_map(|s| s.split(',')).map(str::trim).filter(|s| !s.is_empty()) {
        let t: Target = item.parse().map_err(|e| CliError::usage(format!("{e}")))?;
        if !out.contains(&t) {
            out.push(t);
        }
    }
    Ok(out)
}

pub fn parse_models(items: &[String]) -> CliResult<Vec<ModelKind>> {
    let mut out = Vec::new();
    for item in items.iter().flat_map(|s| s.split(',')).map(str::trim).filter(|s| !s.is_empty()) {
        let k: ModelKind = item.parse().map_err(|e| CliError::usage(format!("{e}")))?;
        if !out.contains(&k) {
            out.push(k);
        }
    }
    Ok(out)
}
