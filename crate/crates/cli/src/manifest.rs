use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use bibuq::{Error, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub seed: Option<u64>,
    /// SHA-256 of every input file, keyed by the path as given.
    pub inputs: BTreeMap<String, String>,
    /// SHA-256 of every output file written next to the manifest.
    pub outputs: BTreeMap<String, String>,
    /// Resolved configuration; pass this file to `--config` to rerun.
    pub config: serde_json::Value,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
}

pub fn now_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn digest_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::input(path, e))?;
    Ok(hex(&Sha256::digest(&bytes)))
}

/// Collects outputs of one command run and writes them with a manifest.
pub struct Run {
    command: &'static str,
    seed: Option<u64>,
    config: serde_json::Value,
    inputs: BTreeMap<String, String>,
    outputs: BTreeMap<String, String>,
    out_dir: Option<PathBuf>,
    started: u128,
}

impl Run {
    pub fn start(command: &'static str, seed: Option<u64>, config: &impl Serialize, out_dir: Option<&Path>) -> Result<Run> {
        if let Some(dir) = out_dir {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        Ok(Run {
            command,
            seed,
            config: serde_json::to_value(config)?,
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            out_dir: out_dir.map(Path::to_path_buf),
            started: now_ms(),
        })
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        let d = digest_file(path)?;
        self.inputs.insert(path.display().to_string(), d);
        Ok(())
    }

    pub fn out_path(&self, name: &str) -> Option<PathBuf> {
        self.out_dir.as_ref().map(|d| d.join(name))
    }

    /// Write `bytes` to `<out>/<name>`; a no-op without an output directory.
    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        if let Some(path) = self.out_path(name) {
            fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
            self.outputs.insert(name.to_string(), hex(&Sha256::digest(bytes)));
        }
        Ok(())
    }

    /// Record a file already written into the output directory.
    pub fn record(&mut self, name: &str) -> Result<()> {
        if let Some(path) = self.out_path(name) {
            let d = digest_file(&path)?;
            self.outputs.insert(name.to_string(), d);
        }
        Ok(())
    }

    pub fn finish(self) -> Result<()> {
        let Some(dir) = &self.out_dir else {
            return Ok(());
        };
        let manifest = RunManifest {
            command: self.command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: self.seed,
            inputs: self.inputs,
            outputs: self.outputs,
            config: self.config,
            started_unix_ms: self.started,
            finished_unix_ms: now_ms(),
        };
        let path = dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(&manifest)? + "\n";
        fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }
}
