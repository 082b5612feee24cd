use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tmsv_core::TableParams;

use crate::config::RunConfig;
use crate::CliError;

/// Everything needed to regenerate a run's output files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    /// RFC 3339, UTC.
    pub timestamp: String,
    pub master_seed: Option<u64>,
    pub tables: Vec<TableParams>,
    pub config: RunConfig,
    pub outputs: Vec<PathBuf>,
    /// Scalar results worth keeping next to the files (limits, estimates).
    #[serde(default)]
    pub results: serde_json::Value,
}

impl RunManifest {
    pub fn new(config: RunConfig, outputs: Vec<PathBuf>, results: serde_json::Value) -> Self {
        RunManifest {
            command: config.command().to_string(),
            version: tmsv_core::VERSION.to_string(),
            timestamp: chrono::Utc::now().to_rfc3339(),
            master_seed: config.master_seed(),
            tables: config.tables(),
            config,
            outputs,
            results,
        }
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }
}
