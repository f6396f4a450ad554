//! Run manifests and the output directory they describe.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

/// Collects artifacts in memory and writes them, plus `manifest.json`, only once
/// the whole command has succeeded.
pub struct Output {
    dir: PathBuf,
    files: Vec<(String, Vec<u8>)>,
}

impl Output {
    pub fn new(dir: &Path) -> Self {
        Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), bytes));
    }

    pub fn add_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.add(name, s.into_bytes());
        Ok(())
    }

    pub fn add_csv(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) {
        let mut s = header.join(",");
        s.push('\n');
        for row in rows {
            s.push_str(&row.join(","));
            s.push('\n');
        }
        self.add(name, s.into_bytes());
    }

    pub fn commit(self, run: &RunInfo) -> Result<()> {
        fs::create_dir_all(&self.dir).with_context(|| format!("creating {}", self.dir.display()))?;
        let mut names = Vec::new();
        for (name, bytes) in &self.files {
            let path = self.dir.join(name);
            fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
            names.push(name.clone());
        }
        let manifest = json!({
            "command": run.command,
            "config": run.config,
            "config_hash": config_hash(&run.config),
            "versions": {
                "dframes": env!("CARGO_PKG_VERSION"),
                "dilation_frames": dilation_frames::VERSION,
            },
            "seed": run.seed,
            "tolerances": run.tolerances,
            "workers": run.workers,
            "outputs": names,
        });
        fs::write(self.dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
        Ok(())
    }
}

/// What a command ran with.
pub struct RunInfo {
    pub command: String,
    pub config: Value,
    pub seed: Option<u64>,
    pub tolerances: Value,
    pub workers: usize,
}

/// SHA-256 of the canonical (key-sorted, compact) JSON form of `config`.
pub fn config_hash(config: &Value) -> String {
    let canonical = serde_json::to_string(config).expect("JSON values always serialize");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}
