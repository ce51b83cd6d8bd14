use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use stirap::dynamics::IntegratorSettings;
use stirap::PulseConfig;

use crate::Command;

/// Record written next to every output file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command_name: String,
    /// The fully resolved command; `stirap replay` executes it again.
    pub command: Command,
    pub configs: Vec<PulseConfig>,
    pub tolerances: Option<IntegratorSettings>,
    pub outputs: Vec<PathBuf>,
    pub version: String,
    pub wall_clock_seconds: f64,
}

impl RunManifest {
    pub fn path_for(output: &Path) -> PathBuf {
        let mut name = output.file_name().map(|s| s.to_os_string()).unwrap_or_default();
        name.push(".manifest.json");
        output.with_file_name(name)
    }

    pub fn write_next_to(&self, output: &Path) -> Result<PathBuf> {
        let path = Self::path_for(output);
        let json = serde_json::to_string_pretty(self)?;
        fs::write(&path, json + "\n").with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))
    }
}
