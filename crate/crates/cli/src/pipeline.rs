use std::path::PathBuf;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use radrec_core::radrec::{build_report, ContributionReport, RadRecModel};

use crate::config::Overrides;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
#[value(rename_all = "snake_case")]
pub enum SweepParameter {
    Gamma,
    Eta,
    GridN,
    Epsilon,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

/// Everything one invocation needs besides the model file's contents.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model_path: PathBuf,
    /// `None` writes to standard output.
    pub output_path: Option<PathBuf>,
    pub format: Format,
    pub eta: Option<f64>,
    pub fd_step: Option<f64>,
    pub sweep: Option<SweepSpec>,
    pub seed: u64,
}

impl RunConfig {
    pub fn new(model_path: impl Into<PathBuf>) -> Self {
        RunConfig {
            model_path: model_path.into(),
            output_path: None,
            format: Format::Json,
            eta: None,
            fd_step: None,
            sweep: None,
            seed: 0,
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        if let Some(eta) = self.eta {
            if !(eta > 0.0) || !eta.is_finite() {
                return Err(CliError::Usage(format!("--eta must be positive and finite, got {eta}")));
            }
        }
        if let Some(h) = self.fd_step {
            if !(h > 0.0 && h < 1.0) {
                return Err(CliError::Usage(format!("--fd-step must lie in (0, 1), got {h}")));
            }
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return Err(CliError::Usage("sweep values must not be empty".into()));
            }
            if let Some(v) = sweep.values.iter().find(|v| !v.is_finite()) {
                return Err(CliError::Usage(format!("sweep value {v} is not finite")));
            }
        }
        Ok(())
    }

    pub fn overrides(&self) -> Overrides {
        Overrides {
            eta: self.eta,
            fd_step: self.fd_step,
        }
    }
}

/// Runs every supported diagram class on a validated model. Failures carry
/// the class (and, below it, the channel) they came from.
pub fn run_pipeline(model: &RadRecModel) -> CliResult<ContributionReport> {
    Ok(build_report(model)?)
}
