//! Report types and atomic output.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::{ExperimentConfig, Subcommand};

/// Bumped whenever a CSV header or a JSON key changes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Informational checks are reported but never change the exit code.
    pub enforced: bool,
    pub detail: String,
}

impl Check {
    pub fn enforced(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            enforced: true,
            detail: detail.into(),
        }
    }

    pub fn informational(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            enforced: false,
            ..Self::enforced(name, passed, detail)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Artifact {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    pub wall_clock_s: f64,
    pub trials: u64,
    pub trials_per_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub artifact_version: String,
    pub subcommand: Subcommand,
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub warnings: Vec<String>,
    pub results: Vec<Value>,
    pub fits: Vec<Value>,
    pub checks: Vec<Check>,
    pub artifacts: Vec<Artifact>,
    pub metrics: Metrics,
}

impl RunReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed || !c.enforced)
    }

    /// Process exit status: 0 when every enforced check passes, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.all_passed() {
            0
        } else {
            2
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Written instead of a report when a point panics.
#[derive(Debug, Clone, Serialize)]
pub struct PartialManifest {
    pub schema_version: u32,
    pub subcommand: Subcommand,
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub completed: Vec<Value>,
    pub failed_point: Option<String>,
    pub panic_message: String,
}

/// SHA-256 of the config with the parallelism and output location blanked,
/// since neither affects any number in the report.
pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let mut c = cfg.clone();
    c.workers = 1;
    c.output = PathBuf::new();
    sha256_hex(c.to_toml().as_bytes())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Write via a temporary file in the same directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating temp file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_ignores_parallelism_and_output() {
        let a = ExperimentConfig::defaults(Subcommand::Kac);
        let mut b = a.clone();
        b.workers = 17;
        b.output = "/elsewhere".into();
        assert_eq!(config_hash(&a), config_hash(&b));
        b.master_seed += 1;
        assert_ne!(config_hash(&a), config_hash(&b));
    }

    #[test]
    fn sha256_known_value() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/out.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }
}
