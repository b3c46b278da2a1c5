use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct InputDigest {
    pub path: PathBuf,
    pub sha256: String,
}

/// Record of one invocation: enough to rerun it and check the inputs are unchanged.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub config: serde_json::Value,
    pub inputs: Vec<InputDigest>,
    pub seed: Option<u64>,
    pub version: String,
    pub started_at_unix: f64,
    pub wall_clock_seconds: f64,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub struct Recorder {
    started: Instant,
    started_at_unix: f64,
    inputs: Vec<InputDigest>,
    pub seed: Option<u64>,
}

impl Recorder {
    pub fn start() -> Self {
        Recorder {
            started: Instant::now(),
            started_at_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs_f64())
                .unwrap_or(0.0),
            inputs: Vec::new(),
            seed: None,
        }
    }

    /// Reads `path` and records its digest.
    pub fn read(&mut self, path: &Path) -> sigkit::Result<Vec<u8>> {
        let bytes = std::fs::read(path).map_err(|e| {
            sigkit::Error::InvalidInput(format!("cannot read {}: {e}", path.display()))
        })?;
        self.inputs.push(InputDigest {
            path: path.to_path_buf(),
            sha256: sha256_hex(&bytes),
        });
        Ok(bytes)
    }

    pub fn finish(
        self,
        subcommand: &str,
        config: serde_json::Value,
        exit_code: i32,
        error: Option<String>,
    ) -> RunManifest {
        RunManifest {
            subcommand: subcommand.to_string(),
            config,
            inputs: self.inputs,
            seed: self.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            started_at_unix: self.started_at_unix,
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
            exit_code,
            error,
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
