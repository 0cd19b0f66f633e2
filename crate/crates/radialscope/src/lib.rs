//! Configuration, orchestration and report emission for radial-point analyses.

pub mod config;
pub mod emit;
pub mod error;
pub mod pipeline;
pub mod report;

pub use config::{AnalysisConfig, Mode, Options};
pub use emit::{emit, to_canonical_json, Format};
pub use error::RunError;
pub use pipeline::{run_analysis, run_command, Command};
pub use report::AnalysisReport;
