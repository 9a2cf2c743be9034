//! Numerical consistency checks shared by the test suites and the CLI.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixtures::CountertermToy;
use crate::quad::log_log_slope;
use crate::radrec::{extract_amplitude, lowest_order_coefficient, se_bound_coefficient, se_free_coefficient, vertex_coefficient, RadRecModel};
use crate::spectral::OperatorMatrix;

/// Outcome of one check. `pass` is `value ≤ tolerance` (false for NaN).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub context: Vec<String>,
}

impl ResidualReport {
    pub fn new(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        ResidualReport {
            name: name.into(),
            value,
            tolerance,
            pass: value <= tolerance,
            context: Vec::new(),
        }
    }

    pub fn note(mut self, line: impl Into<String>) -> Self {
        self.context.push(line.into());
        self
    }
}

/// With `T = (S − 1)/i`: `max_p |2 Im T_pp − Σ_q |T_qp|²|`, tolerance `1e-10·dim`.
pub fn optical_theorem_residual(s: &OperatorMatrix) -> ResidualReport {
    let n = s.dim();
    let t = (s.entries() - OperatorMatrix::identity(n).entries()) * Complex64::new(0.0, -1.0);
    let value = (0..n)
        .map(|p| {
            let flux: f64 = t.column(p).iter().map(|z| z.norm_sqr()).sum();
            (2.0 * t[(p, p)].im - flux).abs()
        })
        .fold(0.0, f64::max);
    ResidualReport::new("optical theorem", value, 1e-10 * n as f64).note(format!("dim = {n}"))
}

/// `exp(iK)` for Hermitian `K`.
pub fn unitary_from_generator(k: &OperatorMatrix) -> Result<OperatorMatrix> {
    let dev = k.hermiticity_deviation();
    if dev > 1e-12 * k.max_abs().max(1.0) {
        return Err(Error::InvalidInput(format!("generator is not Hermitian (deviation {dev:.3e})")));
    }
    OperatorMatrix::new((k.entries() * Complex64::i()).exp())
}

/// Lowest-order plus first-order coefficients of every class the model
/// supports.
pub fn summed_coefficients(model: &RadRecModel) -> Result<f64> {
    let mut c = lowest_order_coefficient(model)?.coefficient
        + se_bound_coefficient(model)?.coefficient
        + vertex_coefficient(model)?.coefficient;
    if model.spectrum().continuum_interval().is_some() {
        c += se_free_coefficient(model)?.coefficient;
    }
    Ok(c)
}

/// `| Σ_q |τ_q|² − Σ coefficients |` with Σ and Λ scaled by `eps`.
pub fn consistency_residual(model: &RadRecModel, eps: f64) -> Result<f64> {
    let scaled = model.scaled(eps);
    let tau2: f64 = extract_amplitude(&scaled)?.iter().map(|ch| ch.value.norm_sqr()).sum();
    Ok((tau2 - summed_coefficients(&scaled)?).abs())
}

pub const NOISE_FLOOR: f64 = 1e-14;

/// Fits `log r(ε) ~ 2 log ε`: value is `|slope − 2|`, tolerance 0.1.
///
/// Residuals at or below the noise floor are dropped. If every residual is
/// below it, the consistency is exact and the check passes with value 0.
pub fn perturbative_consistency(model: &RadRecModel, eps: &[f64]) -> Result<ResidualReport> {
    let positive: Vec<f64> = eps.iter().copied().filter(|&e| e > 0.0).collect();
    if positive.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "need at least 3 positive ε values, got {}",
            positive.len()
        )));
    }
    let (lo, hi) = positive
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &e| (lo.min(e), hi.max(e)));
    if hi / lo < 100.0 {
        return Err(Error::InvalidParameter(format!(
            "ε values must span at least two decades (got {lo:e}..{hi:e})"
        )));
    }
    let mut rows = Vec::with_capacity(positive.len());
    for &e in &positive {
        rows.push((e, consistency_residual(model, e)?));
    }
    let context: Vec<String> = rows.iter().map(|(e, r)| format!("ε = {e:e}: r = {r:.3e}")).collect();
    let above: Vec<(f64, f64)> = rows.iter().copied().filter(|&(_, r)| r > NOISE_FLOOR).collect();
    let mut report = match above.len() {
        0 => ResidualReport::new("perturbative consistency", 0.0, 0.1).note("all residuals below the noise floor"),
        1 => {
            return Err(Error::ExtrapolationFailed(format!(
                "only one residual above the noise floor {NOISE_FLOOR:e}; slope undefined"
            )))
        }
        _ => {
            let (xs, ys): (Vec<f64>, Vec<f64>) = above.into_iter().unzip();
            let slope = log_log_slope(&xs, &ys)?;
            ResidualReport::new("perturbative consistency", (slope - 2.0).abs(), 0.1).note(format!("slope = {slope:.4}"))
        }
    };
    report.context.extend(context);
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountertermMode {
    /// `G^(2)` with the counterterm sum.
    Regular,
    /// `U^(2)` alone; expected to fail.
    Diagnostic,
}

/// Gap sweep of the counterterm toy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountertermSweep {
    pub mode: CountertermMode,
    pub gaps: Vec<f64>,
    pub norms: Vec<f64>,
    /// `max ‖G‖ / ‖G(largest gap)‖`.
    pub ratio: f64,
    /// `|G_fi(smallest gap) − limit|`.
    pub deviation: f64,
    pub limit: f64,
    pub slope: Option<f64>,
}

pub fn counterterm_sweep(toy: &CountertermToy, gaps: &[f64], mode: CountertermMode) -> Result<CountertermSweep> {
    if gaps.is_empty() || gaps.iter().any(|&d| !(d > 0.0) || !d.is_finite()) {
        return Err(Error::InvalidParameter("gaps must be positive and finite".into()));
    }
    let mut values = Vec::with_capacity(gaps.len());
    for &d in gaps {
        let t = toy.with_gap(d);
        let g = match mode {
            CountertermMode::Regular => t.g2()?,
            CountertermMode::Diagnostic => t.u2()?,
        };
        values.push(g);
    }
    let norms: Vec<f64> = values.iter().map(OperatorMatrix::frobenius_norm).collect();
    let (imax, _) = gaps
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &d)| if d > acc.1 { (i, d) } else { acc });
    let (imin, _) = gaps
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &d)| if d < acc.1 { (i, d) } else { acc });
    let reference = norms[imax];
    let ratio = norms.iter().fold(0.0f64, |m, &n| m.max(n)) / reference;
    let limit = -toy.v_fm * toy.v_mi / ((toy.energy - toy.eps_f) * (toy.energy - toy.eps_f));
    let deviation = (values[imin].entries()[(CountertermToy::F, CountertermToy::I)] - limit).norm();
    let slope = if gaps.len() >= 2 && norms.iter().all(|&n| n > 0.0) {
        log_log_slope(gaps, &norms).ok()
    } else {
        None
    };
    Ok(CountertermSweep {
        mode,
        gaps: gaps.to_vec(),
        norms,
        ratio,
        deviation,
        limit,
        slope,
    })
}

/// Passes iff the norm ratio is at most 2 and the small-gap value matches
/// the analytic limit within 1e-6; value is `max(ratio/2, deviation/1e-6)`.
pub fn counterterm_regularity(toy: &CountertermToy, gaps: &[f64], mode: CountertermMode) -> Result<ResidualReport> {
    let s = counterterm_sweep(toy, gaps, mode)?;
    let value = (s.ratio / 2.0).max(s.deviation / 1e-6);
    let name = match mode {
        CountertermMode::Regular => "counterterm regularity",
        CountertermMode::Diagnostic => "counterterm regularity (no counterterms)",
    };
    let mut report = ResidualReport::new(name, value, 1.0)
        .note(format!("norm ratio = {:.4e}", s.ratio))
        .note(format!("deviation from limit {:.6e} = {:.3e}", s.limit, s.deviation));
    if let Some(slope) = s.slope {
        report = report.note(format!("log-log slope = {slope:.4}"));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{random_hermitian, seeded_rng};

    #[test]
    fn unitary_passes_optical_theorem() {
        let mut rng = seeded_rng(7);
        for dim in [2, 5, 12] {
            let k = random_hermitian(&mut rng, dim, 1.0);
            let s = unitary_from_generator(&k).unwrap();
            assert!(optical_theorem_residual(&s).pass);
        }
    }

    #[test]
    fn non_unitary_fails() {
        let r = optical_theorem_residual(&OperatorMatrix::diagonal_real(&[1.1, 1.1]));
        assert!(!r.pass);
        assert!((r.value - 0.21).abs() < 1e-12);
        assert_eq!(optical_theorem_residual(&OperatorMatrix::identity(3)).value, 0.0);
    }

    #[test]
    fn nan_never_passes() {
        assert!(!ResidualReport::new("x", f64::NAN, 1.0).pass);
    }

    #[test]
    fn counterterm_modes() {
        let toy = CountertermToy::default();
        let gaps = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8];
        let r = counterterm_regularity(&toy, &gaps, CountertermMode::Regular).unwrap();
        assert!(r.pass, "{r:?}");
        let diag = counterterm_sweep(&toy, &gaps, CountertermMode::Diagnostic).unwrap();
        assert!(diag.ratio > 50.0);
        assert!((diag.slope.unwrap() + 1.0).abs() < 0.05);
    }

    #[test]
    fn consistency_rejects_narrow_sweep() {
        let m = crate::fixtures::four_level_model();
        assert!(matches!(
            perturbative_consistency(&m, &[0.1, 0.2, 0.3]),
            Err(Error::InvalidParameter(_))
        ));
    }
}
