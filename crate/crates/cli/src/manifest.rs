//! Run manifests: a small JSON file written beside every artifact with the
//! configuration echo, the code version, and the wall time.

use serde::Serialize;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Serialize)]
pub struct Manifest {
    pub command: String,
    pub config: serde_json::Value,
    pub seed: u64,
    pub version: String,
    pub rng: String,
    pub threads: usize,
    pub wall_time_s: f64,
}

pub struct Timer {
    start: Instant,
}

impl Timer {
    pub fn start() -> Self {
        Timer { start: Instant::now() }
    }

    pub fn finish(
        self,
        artifact: &Path,
        command: &str,
        config: serde_json::Value,
        seed: u64,
    ) -> std::io::Result<()> {
        let manifest = Manifest {
            command: command.to_string(),
            config,
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            rng: "ChaCha12 (counter-based), per-slot splitmix64 seed derivation".to_string(),
            threads: effective_threads(),
            wall_time_s: self.start.elapsed().as_secs_f64(),
        };
        let path = manifest_path(artifact);
        std::fs::write(path, serde_json::to_string_pretty(&manifest)?)
    }
}

pub fn manifest_path(artifact: &Path) -> PathBuf {
    let mut name = artifact.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    artifact.with_file_name(name)
}

/// Parallelism cap from WTD_THREADS; the orchestrator is sequential today,
/// so the cap is respected by construction and recorded for provenance.
pub fn effective_threads() -> usize {
    std::env::var("WTD_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or(1)
}

/// FNV-1a over a byte stream; used to fingerprint definition files in
/// reports so reruns can be matched to their inputs.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}
