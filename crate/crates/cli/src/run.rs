//! Artifact writing with provenance: every JSON artifact carries a `run`
//! block, SVGs carry it as a comment, and each command leaves a
//! `run_manifest.json` with the SHA-256 of every file it wrote.

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::hex;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Serialize)]
pub struct RunInfo {
    pub command: String,
    pub config_hash: String,
    pub seed: Option<u64>,
}

#[derive(Debug, Serialize)]
struct ArtifactEntry {
    path: String,
    sha256: String,
    bytes: usize,
}

#[derive(Debug, Serialize)]
struct RunManifest<'a> {
    run: &'a RunInfo,
    artifacts: Vec<ArtifactEntry>,
}

pub struct Recorder {
    dir: PathBuf,
    run: RunInfo,
    artifacts: Vec<ArtifactEntry>,
}

impl Recorder {
    pub fn new(dir: PathBuf, run: RunInfo) -> Self {
        Recorder {
            dir,
            run,
            artifacts: Vec::new(),
        }
    }

    /// Write `bytes` to `name` under the command directory.
    pub fn bytes(&mut self, name: &str, bytes: &[u8]) -> CliResult<PathBuf> {
        let path = self.dir.join(name);
        write_bytes(&path, bytes)?;
        self.artifacts.push(ArtifactEntry {
            path: name.to_string(),
            sha256: hex(&Sha256::digest(bytes)),
            bytes: bytes.len(),
        });
        Ok(path)
    }

    /// Write a file outside the command directory, listed under `label`.
    pub fn external(&mut self, label: &str, path: &Path, bytes: &[u8]) -> CliResult<()> {
        write_bytes(path, bytes)?;
        self.artifacts.push(ArtifactEntry {
            path: label.to_string(),
            sha256: hex(&Sha256::digest(bytes)),
            bytes: bytes.len(),
        });
        Ok(())
    }

    /// Render with a core writer and record the result.
    pub fn with<F>(&mut self, name: &str, render: F) -> CliResult<PathBuf>
    where
        F: FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
    {
        let mut buf = Vec::new();
        render(&mut buf).map_err(|e| CliError::io(self.dir.join(name), e))?;
        self.bytes(name, &buf)
    }

    /// Pretty JSON with the run block as the first key of the object.
    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<PathBuf> {
        let body = serde_json::to_value(value).map_err(|e| CliError::Usage(e.to_string()))?;
        let mut obj = serde_json::Map::new();
        obj.insert("run".into(), serde_json::to_value(&self.run).expect("run info serializes"));
        match body {
            Value::Object(m) => obj.extend(m),
            other => {
                obj.insert("data".into(), other);
            }
        }
        let mut text = serde_json::to_vec_pretty(&Value::Object(obj)).expect("json value serializes");
        text.push(b'\n');
        self.bytes(name, &text)
    }

    pub fn svg_comment(&self) -> String {
        format!(
            "tg {} config_hash={} seed={}",
            self.run.command,
            self.run.config_hash,
            self.run.seed.map_or_else(|| "none".to_string(), |s| s.to_string())
        )
    }

    pub fn finish(mut self) -> CliResult<()> {
        self.artifacts.sort_by(|a, b| a.path.cmp(&b.path));
        let manifest = RunManifest {
            run: &self.run,
            artifacts: self.artifacts,
        };
        let mut text = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
        text.push(b'\n');
        write_bytes(&self.dir.join("run_manifest.json"), &text)
    }
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}
