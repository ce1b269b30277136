//! Output directory handling and the run manifest.

use std::path::{Path, PathBuf};
use std::time::Instant;

use macroscope::io::write_atomic;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Seed used when `--seed` is absent.
pub const DEFAULT_SEED: u64 = 20220923;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_hash: String,
    pub seed: Option<u64>,
    pub artifact_version: String,
    pub outputs: Vec<String>,
    pub wall_time: f64,
    pub device_hash: Option<String>,
    pub versions: Value,
    pub tolerances: Value,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub struct Run {
    command: String,
    config: Value,
    out: PathBuf,
    seed: Option<u64>,
    device_hash: Option<String>,
    tolerances: Value,
    outputs: Vec<String>,
    start: Instant,
}

impl Run {
    pub fn new(command: &str, config: Value, out: &Path) -> Self {
        Run {
            command: command.to_string(),
            config,
            out: out.to_path_buf(),
            seed: None,
            device_hash: None,
            tolerances: json!({}),
            outputs: Vec::new(),
            start: Instant::now(),
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn device_json(mut self, device_json: &str) -> Self {
        self.device_hash = Some(sha256_hex(device_json.as_bytes()));
        self
    }

    pub fn tolerances(mut self, t: Value) -> Self {
        self.tolerances = t;
        self
    }

    pub fn write(&mut self, name: &str, contents: &str) -> macroscope::Result<PathBuf> {
        let path = self.out.join(name);
        write_atomic(&path, contents.as_bytes())?;
        self.outputs.push(name.to_string());
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> macroscope::Result<PathBuf> {
        let text = serde_json::to_string_pretty(value)? + "\n";
        self.write(name, &text)
    }

    /// Writes `manifest.json` and returns it.
    pub fn finish(self) -> macroscope::Result<RunManifest> {
        let mut hashed = json!({ "command": self.command, "config": self.config });
        if let Some(d) = &self.device_hash {
            hashed["device_hash"] = json!(d);
        }
        let manifest = RunManifest {
            config_hash: sha256_hex(serde_json::to_string(&hashed)?.as_bytes()),
            command: self.command,
            seed: self.seed,
            artifact_version: VERSION.to_string(),
            outputs: self.outputs,
            wall_time: self.start.elapsed().as_secs_f64(),
            device_hash: self.device_hash,
            versions: json!({ "macroscope": VERSION, "macroscope-cli": VERSION }),
            tolerances: self.tolerances,
        };
        let text = serde_json::to_string_pretty(&manifest)? + "\n";
        write_atomic(&self.out.join("manifest.json"), text.as_bytes())?;
        Ok(manifest)
    }
}
