use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{failed, CliError};

/// What was run, with which settings, and what it produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// The full command line.
    pub args: Vec<String>,
    pub config: serde_json::Value,
    pub seeds: BTreeMap<String, u64>,
    /// SHA-256 of every written file, keyed by path.
    pub checksums: BTreeMap<String, String>,
    pub threads: usize,
    pub wall_clock_ms: u64,
    pub versions: BTreeMap<String, String>,
}

pub struct Recorder {
    command: &'static str,
    started: Instant,
    threads: usize,
    outputs: Vec<PathBuf>,
}

impl Recorder {
    pub fn start(command: &'static str, threads: usize) -> Self {
        Recorder {
            command,
            started: Instant::now(),
            threads,
            outputs: Vec::new(),
        }
    }

    pub fn output(&mut self, path: impl Into<PathBuf>) {
        self.outputs.push(path.into());
    }

    /// Hashes the recorded outputs (directories recursively) and writes the manifest to `path`.
    pub fn finish(
        self,
        path: &Path,
        config: serde_json::Value,
        seeds: BTreeMap<String, u64>,
    ) -> Result<RunManifest, CliError> {
        let mut checksums = BTreeMap::new();
        for out in &self.outputs {
            hash_into(out, &mut checksums)?;
        }
        // A rerun into the same directory must not hash the previous manifest.
        checksums.remove(&path.display().to_string());
        let versions = BTreeMap::from([
            ("abl".to_string(), env!("CARGO_PKG_VERSION").to_string()),
            (
                "bundle_format".to_string(),
                abl_core::trainer::BUNDLE_FORMAT_VERSION.to_string(),
            ),
            (
                "dataset_format".to_string(),
                abl_core::datasets::FORMAT_VERSION.to_string(),
            ),
        ]);
        let manifest = RunManifest {
            command: self.command.to_string(),
            args: std::env::args().collect(),
            config,
            seeds,
            checksums,
            threads: self.threads,
            wall_clock_ms: self.started.elapsed().as_millis() as u64,
            versions,
        };
        let json = serde_json::to_string_pretty(&manifest).map_err(failed)?;
        fs::write(path, json).map_err(|e| failed(format!("writing {}: {e}", path.display())))?;
        Ok(manifest)
    }
}

fn hash_into(path: &Path, out: &mut BTreeMap<String, String>) -> Result<(), CliError> {
    let err = |e: std::io::Error| failed(format!("hashing {}: {e}", path.display()));
    if path.is_dir() {
        let mut entries: Vec<PathBuf> = fs::read_dir(path)
            .map_err(err)?
            .map(|e| e.map(|e| e.path()))
            .collect::<Result<_, _>>()
            .map_err(err)?;
        entries.sort();
        for entry in entries {
            hash_into(&entry, out)?;
        }
    } else {
        let bytes = fs::read(path).map_err(err)?;
        out.insert(path.display().to_string(), hex::encode(Sha256::digest(&bytes)));
    }
    Ok(())
}
