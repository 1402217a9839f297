//! Change-detection front end: image I/O, pipeline orchestration, synthetic
//! scenes and parameter sweeps on top of `ssn-core`.

pub mod bench;
pub mod config;
pub mod error;
pub mod io;
pub mod pipeline;
pub mod synth;

pub use config::PipelineConfig;
pub use error::{CliError, Result};
pub use pipeline::{run_pipeline, PipelineOutcome};
