use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by the simulator, analysis and orchestration layers.
#[derive(Debug, Error)]
pub enum GpfError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("ground state did not converge after {iterations} iterations (last relative energy change {last_change:.3e}/ms)")]
    NotConverged {
        iterations: usize,
        last_change: f64,
        energy_trace: Vec<f64>,
    },

    #[error("non-finite value in field at t = {time} ms (last checkpoint: {checkpoint:?})")]
    NonFinite {
        time: f64,
        checkpoint: Option<PathBuf>,
    },

    #[error("malformed snapshot {path}: {reason}")]
    Snapshot { path: PathBuf, reason: String },

    #[error("analysis error: {0}")]
    Analysis(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl GpfError {
    /// Process exit status for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            GpfError::Config(_) => 2,
            GpfError::Numerical(_)
            | GpfError::NotConverged { .. }
            | GpfError::NonFinite { .. }
            | GpfError::Analysis(_) => 3,
            GpfError::Snapshot { .. } | GpfError::Io { .. } => 4,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        GpfError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, GpfError>;
