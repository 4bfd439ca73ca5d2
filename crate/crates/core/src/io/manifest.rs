//! The run manifest: an ordered index of every persisted state of a run.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{GpfError, Result};
use crate::io::hash::git_blob_hash;
use crate::io::write_atomic;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Running,
    Complete,
    Failed,
}

/// A file referenced by the manifest, relative to the run directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub file: String,
    pub step: u64,
    pub time_ms: f64,
    pub hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub command: String,
    pub preset: Option<String>,
    pub config_hash: String,
    pub status: RunStatus,
    pub dt: f64,
    pub total_steps: u64,
    pub ground_state: Option<FileEntry>,
    pub snapshots: Vec<FileEntry>,
    pub checkpoints: Vec<FileEntry>,
    /// Observable time series written at completion.
    pub series: Option<String>,
    pub failure: Option<String>,
}

impl RunManifest {
    pub fn new(command: &str, preset: Option<String>, config_hash: &str, dt: f64, total_steps: u64) -> Self {
        RunManifest {
            schema_version: MANIFEST_SCHEMA,
            command: command.into(),
            preset,
            config_hash: config_hash.into(),
            status: RunStatus::Running,
            dt,
            total_steps,
            ground_state: None,
            snapshots: Vec::new(),
            checkpoints: Vec::new(),
            series: None,
            failure: None,
        }
    }

    pub fn path(dir: &Path) -> PathBuf {
        dir.join(MANIFEST_FILE)
    }

    pub fn exists(dir: &Path) -> bool {
        Self::path(dir).is_file()
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = Self::path(dir);
        let text = fs::read_to_string(&path).map_err(|e| GpfError::io(&path, e))?;
        let m: RunManifest = serde_json::from_str(&text).map_err(|e| GpfError::Snapshot {
            path: path.clone(),
            reason: format!("unreadable manifest: {e}"),
        })?;
        if m.schema_version != MANIFEST_SCHEMA {
            return Err(GpfError::Snapshot {
                path,
                reason: format!("manifest schema {} is not {MANIFEST_SCHEMA}", m.schema_version),
            });
        }
        Ok(m)
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        write_atomic(&Self::path(dir), text.as_bytes())
    }

    /// The latest checkpoint whose file is intact.
    pub fn last_valid_checkpoint(&self, dir: &Path) -> Option<&FileEntry> {
        self.checkpoints.iter().rev().find(|c| verify_entry(dir, c).is_ok())
    }

    /// Drop entries beyond `step`, used when resuming from a checkpoint.
    pub fn truncate_after(&mut self, step: u64) {
        self.snapshots.retain(|s| s.step <= step);
        self.checkpoints.retain(|s| s.step <= step);
    }
}

/// Check that `entry` exists and its content hash matches.
pub fn verify_entry(dir: &Path, entry: &FileEntry) -> Result<()> {
    let path = dir.join(&entry.file);
    let bytes = fs::read(&path).map_err(|e| GpfError::io(&path, e))?;
    let h = git_blob_hash(&bytes);
    if h != entry.hash {
        return Err(GpfError::Snapshot {
            path,
            reason: format!("content hash {h} does not match manifest {}", entry.hash),
        });
    }
    Ok(())
}
