//! Argument parsing and subcommand dispatch.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::{load_model, read_config};
use crate::emit::{emit_report, with_output};
use crate::error::{CliError, CliResult};
use crate::pipeline::{run_pipeline, Format, RunConfig, SweepParameter, SweepSpec};
use crate::suites::{run_suite, Suite};
use crate::sweep::{run_sweep, write_sweep};

pub const THREADS_ENV: &str = "RADREC_THREADS";

#[derive(Debug, Parser)]
#[command(name = "radrec", version, about = "Radiative-recombination corrections from finite-basis models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the full pipeline on a model file and write the report.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Override `numerics.eta` from the model file.
        #[arg(long)]
        eta: Option<f64>,
        /// Override `numerics.fd_step` from the model file.
        #[arg(long)]
        fd_step: Option<f64>,
    },
    /// Run a built-in verification suite; exits with 2 if any check fails.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the residual reports here instead of standard output.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Evaluate a model over a list of parameter values.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        param: SweepParameter,
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true, allow_negative_numbers = true)]
        values: Vec<f64>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long)]
        fd_step: Option<f64>,
    },
}

/// Sizes the global worker pool from `RADREC_THREADS` when it is set.
pub fn configure_threads(value: Option<&str>) -> CliResult<()> {
    let Some(raw) = value else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got `{raw}`")))?;
    // A second call in the same process keeps the first pool.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

pub fn execute(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Run {
            config,
            output,
            format,
            eta,
            fd_step,
        } => {
            let run = RunConfig {
                output_path: Some(output),
                format,
                eta,
                fd_step,
                ..RunConfig::new(config)
            };
            run.validate()?;
            let model = load_model(&run.model_path, run.overrides())?;
            let report = run_pipeline(&model)?;
            for w in &report.warnings {
                eprintln!("warning: {}", serde_json::to_string(w).unwrap_or_default());
            }
            emit_report(&report, run.format, run.output_path.as_deref())
        }
        Command::Verify { suite, seed, output } => {
            let reports = run_suite(suite, seed)?;
            with_output(output.as_deref(), |w| {
                serde_json::to_writer_pretty(&mut *w, &reports)?;
                w.write_all(b"\n")
            })?;
            let failed: Vec<&str> = reports.iter().filter(|r| !r.pass).map(|r| r.name.as_str()).collect();
            for r in &reports {
                eprintln!("{}: {} ({:e} vs {:e})", r.name, if r.pass { "PASS" } else { "FAIL" }, r.value, r.tolerance);
            }
            if failed.is_empty() {
                Ok(())
            } else {
                Err(CliError::Diagnostic(format!("failed checks: {}", failed.join(", "))))
            }
        }
        Command::Sweep {
            config,
            param,
            values,
            output,
            format,
            eta,
            fd_step,
        } => {
            let run = RunConfig {
                output_path: output,
                format,
                eta,
                fd_step,
                sweep: Some(SweepSpec { parameter: param, values }),
                ..RunConfig::new(config)
            };
            run.validate()?;
            let cfg = read_config(&run.model_path)?;
            let model = cfg.build(run.overrides())?;
            let table = run_sweep(&cfg, &model, run.sweep.as_ref().expect("set above"))?;
            with_output(run.output_path.as_deref(), |w| write_sweep(&table, run.format, w))
        }
    }
}
