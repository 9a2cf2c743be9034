use std::path::PathBuf;

use radrec_cli::config::read_config;
use radrec_cli::sweep::run_sweep;
use radrec_cli::{emit_report, load_model, read_json_report, run_pipeline, write_csv, write_json, Format, Overrides, SweepParameter, SweepSpec};
use radrec_core::radrec::ContributionReport;

fn example() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../docs/example-model.json")
}

fn full_report() -> ContributionReport {
    let model = load_model(&example(), Overrides::default()).unwrap();
    run_pipeline(&model).unwrap()
}

#[test]
fn example_report_is_additive() {
    let r = full_report();
    assert_eq!(r.classes.len(), 4);
    let sum: f64 = r.classes.iter().map(|c| c.coefficient).sum();
    assert_eq!(r.total_coefficient, sum);
    let channels: f64 = r.channels.iter().map(|c| c.dsigma).sum();
    assert!((channels - r.cross_section).abs() <= 1e-14 * r.cross_section.abs());
}

#[test]
fn json_round_trip_is_exact() {
    let r = full_report();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    emit_report(&r, Format::Json, Some(&path)).unwrap();
    let back = read_json_report(&path).unwrap();
    assert_eq!(back, r);
}

#[test]
fn json_complex_values_are_pairs() {
    let r = full_report();
    let mut buf = Vec::new();
    write_json(&r, &mut buf).unwrap();
    let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
    let value = &v["classes"][0]["terms"][0]["value"];
    assert!(value.is_array() && value.as_array().unwrap().len() == 2, "{value}");
    // keys follow the report's field order
    let text = String::from_utf8(buf).unwrap();
    let at = |k: &str| text.find(&format!("\"{k}\":")).unwrap();
    assert!(at("initial_state") < at("capture_target") && at("capture_target") < at("classes"));
    assert!(at("classes") < at("amplitudes") && at("amplitudes") < at("warnings"));
}

#[test]
fn csv_has_one_row_per_term() {
    let r = full_report();
    let mut buf = Vec::new();
    write_csv(&r, &mut buf).unwrap();
    let mut reader = csv::Reader::from_reader(buf.as_slice());
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, ["class", "channel", "omega", "term", "re", "im", "coefficient", "dsigma"]);
    let rows: Vec<csv::StringRecord> = reader.records().collect::<Result<_, _>>().unwrap();
    let terms: usize = r.classes.iter().map(|c| c.terms.len()).sum();
    assert_eq!(rows.len(), terms);

    // per-class dσ of a channel sums to the channel's dσ
    let dsigma: f64 = r
        .classes
        .iter()
        .map(|c| {
            let row = rows.iter().find(|row| &row[0] == c.label.as_str()).unwrap();
            row[7].parse::<f64>().unwrap()
        })
        .sum();
    assert!((dsigma - r.channels[0].dsigma).abs() <= 1e-12 * r.channels[0].dsigma.abs());
}

#[test]
fn empty_report_gives_header_only() {
    let mut r = full_report();
    r.classes.clear();
    let mut buf = Vec::new();
    write_csv(&r, &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap(), "class,channel,omega,term,re,im,coefficient,dsigma\n");
}

#[test]
fn epsilon_sweep_residuals_decrease() {
    let cfg = read_config(&example()).unwrap();
    let model = cfg.build(Overrides::default()).unwrap();
    let spec = SweepSpec {
        parameter: SweepParameter::Epsilon,
        values: vec![1e-1, 1e-2, 1e-3],
    };
    let table = run_sweep(&cfg, &model, &spec).unwrap();
    let residuals: Vec<f64> = table.rows.iter().map(|r| r.quantities["residual"]).collect();
    assert!(residuals.windows(2).all(|w| w[1] < w[0]), "{residuals:?}");
    // quadratic: each decade in ε costs two in the residual
    for w in residuals.windows(2) {
        let ratio = w[0] / w[1];
        assert!((ratio.log10() - 2.0).abs() < 0.1, "{ratio}");
    }
}

#[test]
fn grid_n_sweep_keeps_coefficients_and_refines_delta_k() {
    let cfg = read_config(&example()).unwrap();
    let model = cfg.build(Overrides::default()).unwrap();
    let spec = SweepSpec {
        parameter: SweepParameter::GridN,
        values: vec![31.0, 61.0],
    };
    let table = run_sweep(&cfg, &model, &spec).unwrap();
    let (a, b) = (&table.rows[0].quantities, &table.rows[1].quantities);
    assert!((a["total_coefficient"] - b["total_coefficient"]).abs() < 1e-12);
    assert!((a["delta_k"] / b["delta_k"] - 2.0).abs() < 1e-9);
}
