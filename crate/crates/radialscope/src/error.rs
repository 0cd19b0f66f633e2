use std::path::PathBuf;

use radialscope_core::resonance::ScanRoot;
use thiserror::Error;

/// Failures that abort a run, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum RunError {
    #[error("config: {0}")]
    Config(String),
    #[error("forbidden energy: {message}")]
    Forbidden { message: String, evidence: Vec<ScanRoot> },
    #[error("{stage}: {message}")]
    Stage { stage: String, message: String },
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Forbidden { .. } => 3,
            RunError::Stage { .. } => 4,
            RunError::Io { .. } => 1,
        }
    }
}
