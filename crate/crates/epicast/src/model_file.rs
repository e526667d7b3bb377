//! Versioned JSON container for fitted models.

use std::fs;
use std::path::Path;

use epicast_core::{FittedModel, Target};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const MODEL_FORMAT: &str = "epicast-model";
pub const MODEL_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub schema_version: u32,
    pub target: Target,
    pub model: FittedModel,
}

#[derive(Deserialize)]
struct Header {
    format: Option<serde_json::Value>,
    schema_version: Option<serde_json::Value>,
}

impl ModelFile {
    pub fn new(target: Target, model: FittedModel) -> Self {
        ModelFile {
            format: MODEL_FORMAT.to_string(),
            schema_version: MODEL_SCHEMA_VERSION,
            target,
            model,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("model files serialize");
        s.push('\n');
        s
    }

    /// Parses a model file, checking the format tag and schema version before
    /// the body.
    pub fn from_json(text: &str, path: &Path) -> CliResult<Self> {
        let bad = |message: String| CliError::Format {
            path: path.to_path_buf(),
            message,
        };
        let header: Header = serde_json::from_str(text).map_err(|e| bad(format!("not a model file: {e}")))?;
        match header.format {
            Some(serde_json::Value::String(f)) if f == MODEL_FORMAT => {}
            _ => return Err(bad(format!("missing or wrong `format` (expected \"{MODEL_FORMAT}\")"))),
        }
        match header.schema_version {
            Some(v) if v.as_u64() == Some(MODEL_SCHEMA_VERSION as u64) => {}
            Some(v) => {
                return Err(CliError::UnsupportedVersion {
                    path: path.to_path_buf(),
                    found: v.to_string(),
                    expected: MODEL_SCHEMA_VERSION,
                })
            }
            None => return Err(bad("missing `schema_version`".into())),
        }
        serde_json::from_str(text).map_err(|e| bad(format!("corrupt model file: {e}")))
    }
}

pub fn save_model(path: &Path, file: &ModelFile) -> CliResult<()> {
    crate::write_file(path, file.to_json().as_bytes())
}

pub fn load_model(path: &Path) -> CliResult<ModelFile> {
    if !path.exists() {
        return Err(CliError::usage(format!("model file {} does not exist", path.display())));
    }
    let text = fs::read_to_string(path).map_err(|e| CliError::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    ModelFile::from_json(&text, path)
}

/// `<label>-<target>.model.json`, e.g. `arima-deaths.model.json`.
pub fn model_file_name(file: &ModelFile) -> String {
    format!("{}-{}.model.json", file.model.kind().label(), file.target)
}
