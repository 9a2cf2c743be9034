//! Command-line front end for `radrec-core`: loads JSON model files, runs the
//! pipeline, sweeps parameters and runs the built-in verification suites.

pub mod app;
pub mod config;
pub mod emit;
pub mod error;
pub mod pipeline;
pub mod suites;
pub mod sweep;

pub use config::{load_model, parse_config, read_config, ModelConfig, Overrides};
pub use emit::{emit_report, read_json_report, write_csv, write_json};
pub use error::{CliError, CliResult};
pub use pipeline::{run_pipeline, Format, RunConfig, SweepParameter, SweepSpec};
