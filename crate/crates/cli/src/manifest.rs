//! `manifest.json`: what each stage produced, from which inputs, and the
//! digests needed to notice edited or outdated artifacts.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub const MANIFEST_FILE: &str = "manifest.json";
const FORMAT: &str = "seedtopic-manifest v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactRecord {
    /// Relative to the output directory.
    pub path: String,
    /// sha256 of the file contents.
    pub digest: String,
    /// sha256 over the stage name, the parameters it depends on and the
    /// digests of its upstream artifacts.
    pub key: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub source: String,
    pub source_digest: String,
    pub format: String,
    pub documents: usize,
    pub sentences: usize,
    pub vocabulary: usize,
    pub tokens: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceCounts {
    pub aspect: usize,
    pub opinion: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub config_hash: String,
    pub rng_seed: u64,
    pub params: serde_json::Value,
    pub corpus: Option<CorpusStats>,
    pub instances: Option<InstanceCounts>,
    pub artifacts: BTreeMap<String, ArtifactRecord>,
    /// Wall-clock seconds of the last run of each stage.
    pub timings: BTreeMap<String, f64>,
}

impl Manifest {
    pub fn empty() -> Self {
        Manifest {
            format: FORMAT.into(),
            config_hash: String::new(),
            rng_seed: 0,
            params: serde_json::Value::Null,
            corpus: None,
            instances: None,
            artifacts: BTreeMap::new(),
            timings: BTreeMap::new(),
        }
    }

    /// Loads the manifest of `dir`, or an empty one if there is none yet.
    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        if !path.exists() {
            return Ok(Manifest::empty());
        }
        let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
        let m: Manifest = serde_json::from_str(&text).map_err(|e| CliError::Manifest {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        if m.format != FORMAT {
            return Err(CliError::Manifest {
                path: path.display().to_string(),
                message: format!("unsupported format '{}'", m.format),
            });
        }
        Ok(m)
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        write_file(&dir.join(MANIFEST_FILE), text.as_bytes())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_digest(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(sha256_hex(&bytes))
}

/// Stage key over `name=value` lines.
pub fn stage_key(stage: &str, parts: &[(&str, String)]) -> String {
    let mut h = Sha256::new();
    h.update(stage.as_bytes());
    h.update(b"\n");
    for (k, v) in parts {
        h.update(k.as_bytes());
        h.update(b"=");
        h.update(v.as_bytes());
        h.update(b"\n");
    }
    hex::encode(h.finalize())
}

/// Writes through a temporary sibling and renames, so an interrupted run
/// never leaves a half-written artifact behind.
pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp: PathBuf = {
        let mut name = path.file_name().unwrap_or_default().to_os_string();
        name.push(".tmp");
        path.with_file_name(name)
    };
    fs::write(&tmp, bytes).map_err(|e| CliError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}
