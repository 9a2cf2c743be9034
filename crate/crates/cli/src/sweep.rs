//! Parameter sweeps over a loaded model. Points are independent and run in
//! parallel; rows come back in input order.

use std::collections::BTreeMap;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use radrec_core::radrec::{eta_regularized_free_integral, lowest_order_coefficient, smeared_lowest_order, PhotonGrid, RadRecModel};
use radrec_core::verify::{consistency_residual, summed_coefficients};

use crate::config::ModelConfig;
use crate::error::{CliError, CliResult};
use crate::pipeline::{run_pipeline, Format, SweepParameter, SweepSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub quantities: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub parameter: SweepParameter,
    pub rows: Vec<SweepRow>,
}

pub fn run_sweep(config: &ModelConfig, model: &RadRecModel, spec: &SweepSpec) -> CliResult<SweepTable> {
    if spec.values.is_empty() {
        return Err(CliError::Usage("sweep values must not be empty".into()));
    }
    let rows = spec
        .values
        .par_iter()
        .map(|&v| sweep_point(config, model, spec.parameter, v).map(|quantities| SweepRow { value: v, quantities }))
        .collect::<CliResult<Vec<_>>>()?;
    Ok(SweepTable {
        parameter: spec.parameter,
        rows,
    })
}

fn sweep_point(config: &ModelConfig, model: &RadRecModel, parameter: SweepParameter, v: f64) -> CliResult<BTreeMap<String, f64>> {
    let mut q = BTreeMap::new();
    match parameter {
        SweepParameter::Gamma => {
            let exact = lowest_order_coefficient(model)?.coefficient;
            let smeared = smeared_lowest_order(model, v).map_err(|e| e.context(format!("gamma = {v}")))?;
            q.insert("smeared".into(), smeared);
            q.insert("lowest_order".into(), exact);
            q.insert("abs_error".into(), (smeared - exact).abs());
        }
        SweepParameter::Eta => {
            let c = eta_regularized_free_integral(model, v).map_err(|e| e.context(format!("eta = {v}")))?;
            q.insert("regularized_re".into(), c.regularized.re);
            q.insert("regularized_im".into(), c.regularized.im);
            q.insert("plemelj_re".into(), c.plemelj.re);
            q.insert("plemelj_im".into(), c.plemelj.im);
            q.insert("abs_error".into(), (c.regularized - c.plemelj).norm());
        }
        SweepParameter::GridN => {
            if v.fract() != 0.0 || v < 2.0 {
                return Err(CliError::Usage(format!("grid_n values must be integers ≥ 2, got {v}")));
            }
            let (lo, hi) = config
                .photons
                .modes
                .range()
                .ok_or_else(|| CliError::config("photons.modes", "no modes to refine"))?;
            let photons = PhotonGrid::uniform(lo, hi, v as usize, model.photons().coupling().clone())
                .map_err(|e| e.context(format!("grid_n = {v}")))?;
            let refined = model.with_photons(photons)?;
            let report = run_pipeline(&refined)?;
            q.insert("total_coefficient".into(), report.total_coefficient);
            q.insert("delta_k".into(), report.delta_k);
            q.insert("cross_section".into(), report.cross_section);
            for entry in &report.classes {
                q.insert(format!("coefficient.{}", entry.label), entry.coefficient);
            }
        }
        SweepParameter::Epsilon => {
            let scaled = model.scaled(v);
            q.insert("summed_coefficients".into(), summed_coefficients(&scaled)?);
            q.insert("residual".into(), consistency_residual(model, v)?);
        }
    }
    Ok(q)
}

pub fn write_sweep<W: Write>(table: &SweepTable, format: Format, mut out: W) -> io::Result<()> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, table)?;
            out.write_all(b"\n")
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["parameter", "value", "quantity", "result"])?;
            let name = match table.parameter {
                SweepParameter::Gamma => "gamma",
                SweepParameter::Eta => "eta",
                SweepParameter::GridN => "grid_n",
                SweepParameter::Epsilon => "epsilon",
            };
            for row in &table.rows {
                for (k, x) in &row.quantities {
                    w.write_record([name, &row.value.to_string(), k, &x.to_string()])?;
                }
            }
            w.flush()
        }
    }
}
