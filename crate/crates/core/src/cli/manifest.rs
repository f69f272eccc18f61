use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::{CliError, Command};
use crate::scene::Scene;

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

/// Command and fully resolved inputs of one run. The scene is stored
/// inline, so a replay does not depend on the original config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub args: Command,
    pub scene: Scene,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub command: String,
    pub config: ResolvedConfig,
    pub master_seed: u64,
    /// Relative to the output directory.
    pub artifacts: Vec<PathBuf>,
    pub tool_version: String,
    pub timestamp_unix: u64,
}

impl RunManifest {
    pub fn new(args: Command, scene: Scene, master_seed: u64, artifacts: Vec<PathBuf>) -> Self {
        RunManifest {
            schema_version: MANIFEST_SCHEMA_VERSION,
            command: args.name().to_string(),
            config: ResolvedConfig { args, scene },
            master_seed,
            artifacts,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }

    pub fn file_name(command: &str) -> String {
        format!("manifest-{command}.json")
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let bad = |message: String| CliError::Manifest {
            path: path.to_path_buf(),
            message,
        };
        let m: RunManifest = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
        if m.schema_version != MANIFEST_SCHEMA_VERSION {
            return Err(bad(format!("unsupported schema version {}", m.schema_version)));
        }
        m.config.scene.validate()?;
        Ok(m)
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        std::fs::write(path, text).map_err(|e| CliError::io(path, e))
    }
}
