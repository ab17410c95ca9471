//! Run manifests written next to every artifact.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use sds_core::ingest::{bytes_hash, SCHEMA_VERSION};

use crate::error::{io_error, CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileHash {
    pub path: String,
    pub sha256: String,
}

impl FileHash {
    pub fn of(path: &Path) -> CliResult<Self> {
        let bytes = std::fs::read(path).map_err(|e| io_error(path, e))?;
        Ok(Self {
            path: path.display().to_string(),
            sha256: bytes_hash(&bytes),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub schema_version: u32,
    pub tool: String,
    pub tool_version: String,
    pub subcommand: String,
    /// Arguments after the program name, without `--workers`.
    pub argv: Vec<String>,
    /// Working directory the relative paths in `argv` refer to.
    pub cwd: String,
    /// Fully resolved settings, defaults included.
    pub config: serde_json::Value,
    pub seeds: BTreeMap<String, u64>,
    pub inputs: Vec<FileHash>,
    pub outputs: Vec<FileHash>,
    /// Worker threads of the recorded run (informational).
    pub workers: usize,
    pub wall_time_s: f64,
}

impl RunManifest {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
        let m: RunManifest =
            serde_json::from_str(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        if m.schema_version != SCHEMA_VERSION {
            return Err(CliError::Data(format!(
                "{}: unsupported schema_version {}",
                path.display(),
                m.schema_version
            )));
        }
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        std::fs::write(path, text).map_err(|e| io_error(path, e))
    }
}

/// Where the manifest of an artifact lives.
pub fn manifest_path_for(artifact: &Path) -> PathBuf {
    if artifact.is_dir() {
        artifact.join("manifest.json")
    } else {
        let mut name = artifact.file_name().map(|n| n.to_os_string()).unwrap_or_default();
        name.push(".manifest.json");
        artifact.with_file_name(name)
    }
}

/// Drop `--workers N` / `--workers=N` so manifests do not depend on it.
pub fn strip_workers(args: &[String]) -> Vec<String> {
    let mut out = Vec::with_capacity(args.len());
    let mut skip = false;
    for a in args {
        if skip {
            skip = false;
            continue;
        }
        if a == "--workers" {
            skip = true;
            continue;
        }
        if a.starts_with("--workers=") {
            continue;
        }
        out.push(a.clone());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn workers_flag_removed_in_both_spellings() {
        let args: Vec<String> = ["sample", "--workers", "4", "--n", "10", "--workers=2"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(strip_workers(&args), vec!["sample", "--n", "10"]);
    }

    #[test]
    fn manifest_sits_next_to_file() {
        assert_eq!(
            manifest_path_for(Path::new("/nonexistent/out/pool.jsonl")),
            PathBuf::from("/nonexistent/out/pool.jsonl.manifest.json")
        );
    }
}
