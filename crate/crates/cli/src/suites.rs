//! Built-in verification suites behind `radrec verify`. Each returns residual
//! reports; only `optical` draws random fixtures, from `seed`.

use clap::ValueEnum;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use radrec_core::fixtures::{four_level_model, random_hermitian, reference_model, seeded_rng, CountertermToy};
use radrec_core::quad::log_log_slope;
use radrec_core::singularity::{plemelj_integrate, PlemeljGrid};
use radrec_core::verify::{
    counterterm_regularity, counterterm_sweep, optical_theorem_residual, perturbative_consistency,
    unitary_from_generator, CountertermMode, ResidualReport,
};

use crate::error::CliResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Optical,
    Plemelj,
    Counterterm,
    Scaling,
}

pub fn run_suite(suite: Suite, seed: u64) -> CliResult<Vec<ResidualReport>> {
    match suite {
        Suite::Optical => optical(seed),
        Suite::Plemelj => plemelj(),
        Suite::Counterterm => counterterm(),
        Suite::Scaling => scaling(),
    }
}

const OPTICAL_TRIALS: usize = 100;

fn optical(seed: u64) -> CliResult<Vec<ResidualReport>> {
    let mut rng = seeded_rng(seed);
    // Generators are drawn sequentially so the fixture depends only on the seed.
    let generators: Vec<_> = (0..OPTICAL_TRIALS)
        .map(|t| {
            let dim = 2 + t % 7;
            random_hermitian(&mut rng, dim, 5.0 / dim as f64)
        })
        .collect();
    let residuals = generators
        .par_iter()
        .map(|k| Ok(optical_theorem_residual(&unitary_from_generator(k)?)))
        .collect::<radrec_core::Result<Vec<_>>>()?;
    let (worst, ratio) = residuals
        .iter()
        .map(|r| (r.value, r.value / r.tolerance))
        .fold((0.0f64, 0.0f64), |(w, q), (v, r)| (w.max(v), q.max(r)));
    Ok(vec![ResidualReport::new("optical theorem", ratio, 1.0)
        .note(format!("{OPTICAL_TRIALS} random generators, dims 2–8, seed {seed}"))
        .note(format!("largest residual {worst:.3e}; value is the worst residual / (1e-10·dim)"))])
}

type Integrand = (&'static str, fn(f64) -> f64, fn(f64) -> f64);

/// Test integrands on [−1, 1] with their principal values `PV ∫ f/(x − x0)`.
fn integrands() -> [Integrand; 3] {
    fn log_ratio(x0: f64) -> f64 {
        ((1.0 - x0) / (1.0 + x0)).ln()
    }
    [
        ("1", |_| 1.0, log_ratio),
        ("x", |x| x, |x0| 2.0 + x0 * log_ratio(x0)),
        ("1/(x²+4)", |x| 1.0 / (x * x + 4.0), |x0| {
            (log_ratio(x0) - x0 * 0.5f64.atan()) / (x0 * x0 + 4.0)
        }),
    ]
}

fn plemelj_error(f: fn(f64) -> f64, pv: fn(f64) -> f64, x0: f64, n: usize) -> CliResult<f64> {
    let grid = PlemeljGrid::uniform(-1.0, 1.0, n);
    let samples: Vec<Complex64> = grid.nodes.iter().map(|&x| Complex64::new(f(x), 0.0)).collect();
    let total = plemelj_integrate(&samples, x0, &grid)?.total;
    let exact = Complex64::new(pv(x0), -std::f64::consts::PI * f(x0));
    Ok((total - exact).norm() / exact.norm())
}

fn plemelj() -> CliResult<Vec<ResidualReport>> {
    let mut out = Vec::new();
    for (name, f, pv) in integrands() {
        let mut worst: f64 = 0.0;
        for x0 in [0.0, 0.3] {
            worst = worst.max(plemelj_error(f, pv, x0, 400)?);
        }
        out.push(ResidualReport::new(format!("plemelj split, f = {name}"), worst, 1e-3).note("400 nodes, x0 ∈ {0, 0.3}"));
    }
    // The constant and linear integrands are integrated exactly, so the
    // order is measured on the rational one with an off-centre pole.
    let ns = [50usize, 100, 200, 400];
    let (_, f, pv) = integrands()[2];
    let errors = ns.iter().map(|&n| plemelj_error(f, pv, 0.3, n)).collect::<CliResult<Vec<_>>>()?;
    let xs: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let order = -log_log_slope(&xs, &errors)?;
    out.push(
        ResidualReport::new("plemelj convergence order", 1.8 / order.max(f64::MIN_POSITIVE), 1.0)
            .note(format!("order = {order:.3}, required ≥ 1.8"))
            .note(format!(
                "errors {} at n = {ns:?}",
                errors.iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>().join(", ")
            )),
    );
    Ok(out)
}

const GAPS: [f64; 7] = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8];

fn counterterm() -> CliResult<Vec<ResidualReport>> {
    let toy = CountertermToy::default();
    let regular = counterterm_regularity(&toy, &GAPS, CountertermMode::Regular)?;
    let diagnostic = counterterm_sweep(&toy, &GAPS, CountertermMode::Diagnostic)?;
    let divergence = match diagnostic.slope {
        Some(s) => ResidualReport::new("no-counterterm divergence slope", (s + 1.0).abs(), 0.05).note(format!("slope = {s:.4}")),
        None => ResidualReport::new("no-counterterm divergence slope", f64::INFINITY, 0.05).note("slope undefined"),
    };
    Ok(vec![regular, divergence])
}

fn scaling() -> CliResult<Vec<ResidualReport>> {
    let eps = [1e-1, 1e-2, 1e-3];
    let mut out = Vec::new();
    for (name, model) in [("four-level", four_level_model()), ("reference", reference_model())] {
        let mut r = perturbative_consistency(&model, &eps)?;
        r.name = format!("{} ({name} fixture)", r.name);
        out.push(r);
    }
    Ok(out)
}
