use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, Serialize)]
pub struct Artifact {
    pub path: String,
    pub sha256: String,
}

/// Provenance record written next to every command's outputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub config_hash: String,
    /// Effective configuration after flags, file and defaults are merged.
    pub config: String,
    pub seed: u64,
    pub inputs: Vec<String>,
    pub outputs: Vec<Artifact>,
    /// Wall-clock seconds per phase.
    pub timings: BTreeMap<String, f64>,
    #[serde(skip)]
    clock: Option<Instant>,
}

impl RunManifest {
    pub fn new(command: &str, config: String, config_hash: String, seed: u64) -> RunManifest {
        RunManifest {
            command: command.into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            config_hash,
            config,
            seed,
            inputs: Vec::new(),
            outputs: Vec::new(),
            timings: BTreeMap::new(),
            clock: Some(Instant::now()),
        }
    }

    pub fn input(&mut self, path: &Path) {
        self.inputs.push(path.display().to_string());
    }

    /// Records a written file together with its content hash.
    pub fn output(&mut self, path: &Path) -> anyhow::Result<()> {
        let bytes = fs::read(path).with_context(|| format!("cannot re-read {}", path.display()))?;
        self.outputs.push(Artifact {
            path: path.display().to_string(),
            sha256: hex(&Sha256::digest(&bytes)),
        });
        Ok(())
    }

    /// Stores the time since the previous lap (or since creation).
    pub fn lap(&mut self, phase: &str) {
        let now = Instant::now();
        if let Some(prev) = self.clock.replace(now) {
            self.timings.insert(phase.into(), (now - prev).as_secs_f64());
        }
    }

    pub fn write(&self, path: &Path) -> anyhow::Result<PathBuf> {
        let text = serde_json::to_string_pretty(self)?;
        fs::write(path, text + "\n").with_context(|| format!("cannot write {}", path.display()))?;
        Ok(path.to_path_buf())
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Manifest path for a single-file output: `model.json` → `model.json.manifest.json`.
pub fn sidecar(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".");
    name.push(MANIFEST_NAME);
    path.with_file_name(name)
}
