//! Report serialization. JSON mirrors [`ContributionReport`] field for field
//! (struct order, shortest round-trip floats); CSV flattens it to one row per
//! class, channel and term.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use radrec_core::radrec::ContributionReport;

use crate::error::{CliError, CliResult};
use crate::pipeline::Format;

pub const CSV_HEADER: [&str; 8] = ["class", "channel", "omega", "term", "re", "im", "coefficient", "dsigma"];

pub fn write_json<W: Write>(report: &ContributionReport, mut out: W) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut out, report)?;
    out.write_all(b"\n")
}

pub fn write_csv<W: Write>(report: &ContributionReport, out: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    let prefactor = (2.0 * PI).powi(3) / report.v_i * report.delta_k;
    for entry in &report.classes {
        for term in &entry.terms {
            let coefficient = entry.channel_coefficient(term.channel);
            w.write_record([
                entry.label.clone(),
                term.channel.to_string(),
                entry.omega_star.to_string(),
                term.name.clone(),
                term.value.re.to_string(),
                term.value.im.to_string(),
                coefficient.to_string(),
                (prefactor * coefficient).to_string(),
            ])?;
        }
    }
    w.flush()
}

pub fn write_report<W: Write>(report: &ContributionReport, format: Format, out: W) -> io::Result<()> {
    match format {
        Format::Json => write_json(report, out),
        Format::Csv => write_csv(report, out),
    }
}

/// Writes to `path`, or to standard output when `path` is `None`.
pub fn emit_report(report: &ContributionReport, format: Format, path: Option<&Path>) -> CliResult<()> {
    with_output(path, |w| write_report(report, format, w))
}

pub fn with_output(path: Option<&Path>, write: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> CliResult<()> {
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|e| CliError::io(p, e))?;
            let mut w = BufWriter::new(file);
            write(&mut w).and_then(|_| w.flush()).map_err(|e| CliError::io(p, e))
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            write(&mut w).and_then(|_| w.flush()).map_err(|e| CliError::io("<stdout>", e))
        }
    }
}

pub fn read_json_report(path: &Path) -> CliResult<ContributionReport> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut de = serde_json::Deserializer::from_reader(io::BufReader::new(file));
    serde_path_to_error::deserialize(&mut de).map_err(|e| CliError::config(e.path().to_string(), e.into_inner().to_string()))
}
