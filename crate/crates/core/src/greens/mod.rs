//! Green's operators, model-space contributions and effective operators.

mod ladder;
mod sucher;

pub use ladder::{evaluate_ladder, greens_order_n, GreensRecursion, LadderResolvent, UEvaluator, UFn};
pub use sucher::{damped_ladder_amplitudes, sucher_energy, sucher_shift_at, SucherFit};

use crate::error::{Error, Result};
use crate::operator::{EnergyDependentOperator, RELATIVE_FD_STEP};
use crate::singularity::reduced_resolvent;
use crate::spectral::{is_degenerate, projectors, ModelSpace, OperatorMatrix, Spectrum};

/// `dM/dE` at `e`: the analytic derivative after it has been cross-checked
/// against finite differences, or the finite-difference value itself.
pub fn checked_derivative(op: &EnergyDependentOperator, e: f64, relative_step: f64) -> Result<OperatorMatrix> {
    match op.analytic_derivative(e) {
        Some(analytic) => {
            let analytic = analytic?;
            op.check_derivative(e, relative_step)?;
            Ok(analytic)
        }
        None => op.numeric_derivative(e, relative_step),
    }
}

/// Model-space contribution `(δU₂/δ𝓔)|_E · P′ · W₁`.
pub fn msc_contribution(
    u2: &EnergyDependentOperator,
    w1: &OperatorMatrix,
    e: f64,
    p_prime: &OperatorMatrix,
) -> Result<OperatorMatrix> {
    msc_contribution_with_step(u2, w1, e, p_prime, RELATIVE_FD_STEP)
}

pub fn msc_contribution_with_step(
    u2: &EnergyDependentOperator,
    w1: &OperatorMatrix,
    e: f64,
    p_prime: &OperatorMatrix,
    relative_step: f64,
) -> Result<OperatorMatrix> {
    check_dim(u2, w1)?;
    if w1.is_zero() {
        return Ok(OperatorMatrix::zeros(w1.dim()));
    }
    let d = checked_derivative(u2, e, relative_step)?;
    Ok(&(&d * p_prime) * w1)
}

fn check_dim(u2: &EnergyDependentOperator, w1: &OperatorMatrix) -> Result<()> {
    if u2.dim() != w1.dim() {
        return Err(Error::InvalidInput(format!(
            "`{}` has dimension {} but W1 has {}",
            u2.tag(),
            u2.dim(),
            w1.dim()
        )));
    }
    Ok(())
}

/// Two-factor Green's operator
/// `U₂(E) Γ_Q(E) W₁ + (δU₂/δ𝓔)|_E P_E W₁`.
///
/// Model-space blocks at other energies `E′` contribute the regular divided
/// difference `(U₂(E) − U₂(E′))/(E − E′) P_{E′} W₁`, whose `E′ → E` limit is
/// the derivative term.
pub fn greens_two_factor(
    u2: &EnergyDependentOperator,
    w1: &OperatorMatrix,
    e: f64,
    spectrum: &Spectrum,
    model: &ModelSpace,
) -> Result<OperatorMatrix> {
    check_dim(u2, w1)?;
    if w1.dim() != spectrum.dim() {
        return Err(Error::InvalidInput("W1 does not match the spectrum dimension".into()));
    }
    let gamma_q = reduced_resolvent(spectrum, model, e)?;
    let u2_e = u2.evaluate(e)?;
    let mut out = &(&u2_e * &gamma_q) * w1;
    let block = model.block_at(spectrum, e)?;
    if !block.is_empty() {
        let (p_e, _) = projectors(spectrum, &block)?;
        out = &out + &msc_contribution(u2, w1, e, &p_e)?;
    }
    for ep in model.distinct_energies(spectrum)? {
        if is_degenerate(e, ep, model.degeneracy_tol()) {
            continue;
        }
        let (p_ep, _) = projectors(spectrum, &model.block_at(spectrum, ep)?)?;
        let divided = (&u2_e - &u2.evaluate(ep)?).scale_real(1.0 / (e - ep));
        out = &out + &(&(&divided * &p_ep) * w1);
    }
    Ok(out)
}

/// `P · [W₂ Γ_Q W₁ + (δW₂/δ𝓔) P′ W₁] · P`.
pub fn effective_interaction(
    w2: &EnergyDependentOperator,
    w1: &OperatorMatrix,
    e: f64,
    spectrum: &Spectrum,
    model: &ModelSpace,
) -> Result<OperatorMatrix> {
    let (p, _) = projectors(spectrum, model)?;
    let g = greens_two_factor(w2, w1, e, spectrum, model)?;
    Ok(&(&p * &g) * &p)
}

/// `H_eff = P H₀ P + W`, with `W` required to live on the model space.
pub fn effective_hamiltonian(w: &OperatorMatrix, spectrum: &Spectrum, model: &ModelSpace) -> Result<OperatorMatrix> {
    let (p, _) = projectors(spectrum, model)?;
    if w.dim() != spectrum.dim() {
        return Err(Error::InvalidInput("W does not match the spectrum dimension".into()));
    }
    let n = w.dim();
    for i in 0..n {
        for j in 0..n {
            if (!model.contains(i) || !model.contains(j)) && w.entries()[(i, j)].norm() != 0.0 {
                return Err(Error::InvalidInput(format!(
                    "W has a nonzero entry ({i},{j}) outside the model space"
                )));
            }
        }
    }
    let h0 = spectrum.hamiltonian();
    Ok(&(&(&p * &h0) * &p) + w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::Profile;
    use crate::spectral::build_spectrum;
    use num_complex::Complex64;

    fn scalar(m: f64) -> OperatorMatrix {
        OperatorMatrix::diagonal_real(&[m])
    }

    fn pole_u2() -> EnergyDependentOperator {
        EnergyDependentOperator::rank1(
            vec![Complex64::new(1.0, 0.0)],
            vec![Complex64::new(1.0, 0.0)],
            Profile::Pole { strength: 1.0, position: 1.0 },
            "U2",
        )
        .unwrap()
    }

    #[test]
    fn msc_examples() {
        let m = msc_contribution(&pole_u2(), &scalar(3.0), 2.0, &scalar(1.0)).unwrap();
        assert!((m.entries()[(0, 0)].re + 3.0).abs() < 1e-14);

        let fd_only = EnergyDependentOperator::from_fn(1, |e| scalar(1.0 / (e - 1.0)), None, "U2");
        let m = msc_contribution_with_step(&fd_only, &scalar(3.0), 2.0, &scalar(1.0), 1e-3).unwrap();
        assert!((m.entries()[(0, 0)].re + 3.0).abs() < 1e-8);

        assert!(msc_contribution(&pole_u2(), &scalar(0.0), 2.0, &scalar(1.0)).unwrap().is_zero());
    }

    #[test]
    fn inconsistent_derivative_is_fatal() {
        let wrong = pole_u2().with_derivative(EnergyDependentOperator::constant(scalar(1.0), "d")).unwrap();
        assert!(matches!(
            msc_contribution(&wrong, &scalar(3.0), 2.0, &scalar(1.0)),
            Err(Error::DerivativeInconsistent { .. })
        ));
    }

    fn three_level() -> (Spectrum, ModelSpace, OperatorMatrix) {
        let s = build_spectrum(&[-1.0, 0.5, 2.0], None).unwrap();
        let model = ModelSpace::with_default_tol([0]);
        let v = OperatorMatrix::from_real_rows(&[vec![0.1, 0.4, -0.2], vec![0.4, 0.3, 0.25], vec![-0.2, 0.25, -0.1]])
            .unwrap();
        (s, model, v)
    }

    #[test]
    fn two_factor_matches_explicit_sum() {
        let (s, model, v) = three_level();
        let slope = OperatorMatrix::from_real_rows(&[vec![0.2, 0.0, 0.1], vec![0.0, -0.3, 0.05], vec![0.1, 0.05, 0.0]])
            .unwrap();
        let u2 = EnergyDependentOperator::linear(v.clone(), slope.clone(), "U2").unwrap();
        let e = -1.0;
        let got = greens_two_factor(&u2, &v, e, &s, &model).unwrap();
        // by hand: U2(E) diag(0, 1/(E-ε1), 1/(E-ε2)) V + slope diag(1,0,0) V
        let u2e = &v + &slope.scale_real(e);
        let gq = OperatorMatrix::diagonal_real(&[0.0, 1.0 / (e - 0.5), 1.0 / (e - 2.0)]);
        let p = OperatorMatrix::diagonal_real(&[1.0, 0.0, 0.0]);
        let oracle = &(&(&u2e * &gq) * &v) + &(&(&slope * &p) * &v);
        assert!(got.max_abs_diff(&oracle) < 1e-14);
    }

    #[test]
    fn two_factor_limits() {
        let (s, _, v) = three_level();
        let all = ModelSpace::with_default_tol([0, 1, 2]);
        // Q empty and a single model block: only the derivative term is left
        let s_deg = build_spectrum(&[0.0, 0.0, 0.0], None).unwrap();
        let u2 = EnergyDependentOperator::linear(v.clone(), v.scale_real(0.5), "U2").unwrap();
        let got = greens_two_factor(&u2, &v, 0.0, &s_deg, &all).unwrap();
        assert!(got.max_abs_diff(&(&v.scale_real(0.5) * &v)) < 1e-14);
        // energy-independent U2: only the Γ_Q term
        let model = ModelSpace::with_default_tol([0]);
        let c = EnergyDependentOperator::constant(v.clone(), "U2");
        let got = greens_two_factor(&c, &v, -1.0, &s, &model).unwrap();
        let gq = reduced_resolvent(&s, &model, -1.0).unwrap();
        assert!(got.max_abs_diff(&(&(&v * &gq) * &v)) < 1e-15);
    }

    #[test]
    fn effective_interaction_is_second_order_rs() {
        let (s, model, v) = three_level();
        let w2 = EnergyDependentOperator::constant(v.clone(), "V");
        let w = effective_interaction(&w2, &v, -1.0, &s, &model).unwrap();
        // Rayleigh–Schrödinger second order: Σ_n |V_0n|²/(ε_0 − ε_n)
        let rs = 0.4f64.powi(2) / (-1.0 - 0.5) + 0.2f64.powi(2) / (-1.0 - 2.0);
        assert!((w.entries()[(0, 0)].re - rs).abs() < 1e-15);
        assert!(w.hermiticity_deviation() < 1e-12);
        assert!(effective_interaction(&w2, &OperatorMatrix::zeros(3), -1.0, &s, &model).unwrap().is_zero());

        let all = ModelSpace::with_default_tol([0, 1, 2]);
        let w = effective_interaction(&w2, &v, -1.0, &s, &all).unwrap();
        // Q empty; the remaining blocks only see divided differences of a constant
        assert!(w.is_zero());
    }

    #[test]
    fn effective_hamiltonian_examples() {
        let s = build_spectrum(&[-0.5], None).unwrap();
        let model = ModelSpace::with_default_tol([0]);
        let h = effective_hamiltonian(&scalar(0.01), &s, &model).unwrap();
        assert!((h.entries()[(0, 0)].re + 0.49).abs() < 1e-15);

        let (s3, model3, _) = three_level();
        let h = effective_hamiltonian(&OperatorMatrix::zeros(3), &s3, &model3).unwrap();
        assert_eq!(h, OperatorMatrix::diagonal_real(&[-1.0, 0.0, 0.0]));
        let outside = OperatorMatrix::diagonal_real(&[0.0, 1.0, 0.0]);
        assert!(matches!(effective_hamiltonian(&outside, &s3, &model3), Err(Error::InvalidInput(_))));
    }
}
