//! Artifact writing and the run manifest.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::CliError;

pub const MANIFEST: &str = "manifest.json";
pub const TIMING: &str = "timing.txt";

#[derive(Debug, Clone, Serialize)]
pub struct ArtifactEntry {
    pub path: String,
    pub sha256: String,
}

/// Record of one run. Wall time and worker count live in a separate timing
/// file so that the manifest depends only on the config.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub config: &'a RunConfig,
    pub timing_file: &'static str,
    pub files: Vec<ArtifactEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Collects artifacts written into one output directory.
pub struct OutputDir {
    root: PathBuf,
    files: Vec<ArtifactEntry>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(root).map_err(|e| CliError::Io(format!("{}: {e}", root.display())))?;
        Ok(OutputDir {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, contents: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.root.join(name);
        std::fs::write(&path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.files.push(ArtifactEntry {
            path: name.to_string(),
            sha256: sha256_hex(contents),
        });
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    /// Writes the manifest over everything written so far, then the timing
    /// file.
    pub fn finish(self, command: &str, config: &RunConfig, elapsed: Duration) -> Result<PathBuf, CliError> {
        let manifest = RunManifest {
            tool: "rmbec",
            version: env!("CARGO_PKG_VERSION"),
            command,
            config,
            timing_file: TIMING,
            files: self.files.clone(),
        };
        let mut text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Io(e.to_string()))?;
        text.push('\n');
        let path = self.root.join(MANIFEST);
        std::fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let timing = format!("wall_seconds={:.6}\nworkers={}\n", elapsed.as_secs_f64(), config.workers);
        std::fs::write(self.root.join(TIMING), timing).map_err(|e| CliError::Io(e.to_string()))?;
        Ok(path)
    }
}
