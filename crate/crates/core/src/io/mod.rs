//! Persistence: snapshots, sidecars, run manifests and tables.

pub mod hash;
pub mod manifest;
pub mod snapshot;
pub mod spectral;
pub mod table;

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{GpfError, Result};

/// Write to a temporary sibling and rename, so readers never see a partial
/// file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| GpfError::io(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    let mut f = fs::File::create(&tmp).map_err(|e| GpfError::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| GpfError::io(&tmp, e))?;
    f.sync_all().map_err(|e| GpfError::io(&tmp, e))?;
    drop(f);
    fs::rename(&tmp, path).map_err(|e| GpfError::io(path, e))
}
