//! Energy shift from the adiabatically damped S-matrix,
//! `ΔE = lim_{γ→0} (iγ/2) λ ∂_λ ln ⟨Φ|S_γ|Φ⟩`.
//!
//! With damping `e^{−γ|t|}` every time-ordered ladder integral is elementary.
//! Splitting the ordered times at `t = 0`, the exponents telescope and each
//! intermediate state `k_j` picks up `1/(i(ε_{k_j} − ε_Φ) + jγ)` on the
//! positive side and `1/(i(ε_{k_j} − ε_Φ) + (n−j)γ)` on the negative side.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::polyfit;
use crate::spectral::{ModelSpace, OperatorMatrix, Spectrum};

/// Extrapolation details for [`sucher_energy`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SucherFit {
    pub energy: f64,
    pub gammas: Vec<f64>,
    pub shifts: Vec<Complex64>,
    /// Quadratic fit of `Re ΔE(γ)`, constant term first.
    pub coefficients: Vec<f64>,
    pub rms: f64,
}

/// `⟨Φ|S^(n)|Φ⟩` for `n = 1..=max_order` at damping `gamma`.
pub fn damped_ladder_amplitudes(
    spectrum: &Spectrum,
    phi: usize,
    v: &OperatorMatrix,
    gamma: f64,
    max_order: usize,
) -> Vec<Complex64> {
    let energies = spectrum.energies();
    let dim = spectrum.dim();
    let e_phi = energies[phi];
    let denom = |k: usize, level: usize| Complex64::new(level as f64 * gamma, energies[k] - e_phi).inv();
    let minus_i = Complex64::new(0.0, -1.0);
    (1..=max_order)
        .map(|n| {
            let mut total = Complex64::new(0.0, 0.0);
            for m in 0..=n {
                let mut row: Vec<Complex64> = (0..dim).map(|k| Complex64::new((k == phi) as u8 as f64, 0.0)).collect();
                if m == 0 {
                    row[phi] *= denom(phi, n);
                }
                for j in 1..=n {
                    row = (0..dim)
                        .map(|col| (0..dim).map(|k| row[k] * v.entries()[(k, col)]).sum())
                        .collect();
                    if j < n {
                        for (k, x) in row.iter_mut().enumerate() {
                            if j <= m {
                                *x *= denom(k, j);
                            }
                            if j >= m {
                                *x *= denom(k, n - j);
                            }
                        }
                    }
                }
                if m == n {
                    row[phi] *= denom(phi, n);
                }
                total += row[phi];
            }
            total * minus_i.powu(n as u32)
        })
        .collect()
}

/// `(iγ/2) [Σ n S_n / (1 + Σ S_n)]` expanded as a power series in the
/// coupling and truncated at `max_order`.
pub fn sucher_shift_at(spectrum: &Spectrum, phi: usize, v: &OperatorMatrix, gamma: f64, max_order: usize) -> Complex64 {
    let s = damped_ladder_amplitudes(spectrum, phi, v, gamma, max_order);
    // r_n = n s_n − Σ_{k=1}^{n−1} s_k r_{n−k}
    let mut r = vec![Complex64::new(0.0, 0.0); max_order + 1];
    for n in 1..=max_order {
        let mut acc = s[n - 1] * n as f64;
        for k in 1..n {
            acc -= s[k - 1] * r[n - k];
        }
        r[n] = acc;
    }
    Complex64::new(0.0, gamma / 2.0) * r.iter().sum::<Complex64>()
}

/// Energy shift of the single model-space state, extrapolated to `γ → 0`
/// by a quadratic least-squares fit.
pub fn sucher_energy(
    spectrum: &Spectrum,
    model: &ModelSpace,
    v: &OperatorMatrix,
    gammas: &[f64],
    max_order: usize,
) -> Result<SucherFit> {
    model.validate(spectrum)?;
    if model.len() != 1 {
        return Err(Error::InvalidInput(format!(
            "the Sucher formula needs a one-dimensional model space, got {}",
            model.len()
        )));
    }
    if v.dim() != spectrum.dim() {
        return Err(Error::InvalidInput("interaction does not match the spectrum dimension".into()));
    }
    if max_order < 2 {
        return Err(Error::InvalidParameter(format!("max_order must be at least 2, got {max_order}")));
    }
    if gammas.len() < 4 {
        return Err(Error::InvalidParameter(format!(
            "γ extrapolation needs at least 4 values, got {}",
            gammas.len()
        )));
    }
    if gammas.iter().any(|&g| !(g > 0.0) || !g.is_finite()) || gammas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter("γ values must be positive and strictly decreasing".into()));
    }
    let phi = model.indices().next().expect("one model state");
    let shifts: Vec<Complex64> = gammas
        .iter()
        .map(|&g| sucher_shift_at(spectrum, phi, v, g, max_order))
        .collect();
    if shifts.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::ExtrapolationFailed("non-finite damped energy shift".into()));
    }
    let re: Vec<f64> = shifts.iter().map(|z| z.re).collect();
    let (coefficients, rms) = polyfit(gammas, &re, 2)?;
    let scale = re.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if rms > 1e-6 * scale + 1e-14 {
        return Err(Error::ExtrapolationFailed(format!(
            "quadratic γ fit residual {rms:e} exceeds tolerance (scale {scale:e})"
        )));
    }
    Ok(SucherFit {
        energy: coefficients[0],
        gammas: gammas.to_vec(),
        shifts,
        coefficients,
        rms,
    })
}
