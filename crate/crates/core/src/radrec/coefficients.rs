//! Per-class coefficients of `2πδ(ε_p − ε_a − ω)` in `2 Im⟨p|−H_eff|p⟩`.
//!
//! Conventions: `q` runs over bound states degenerate with the target `a`;
//! `A = A(ω*)`; Σ and Λ act on the bound line at `ε_a = ε_p − ω*`; sums over
//! intermediate states carry completeness weights (1 for bound states, the
//! quadrature weight for continuum samples).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{DiagramClass, RadRecModel};
use crate::error::{Error, Result, ResultExt};
use crate::greens::checked_derivative;
use crate::singularity::{delta_gamma, eta_regularized_integral, plemelj_integrate, PlemeljGrid};
use crate::spectral::{is_degenerate, OperatorMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedTerm {
    pub name: String,
    pub channel: usize,
    pub value: Complex64,
}

impl NamedTerm {
    fn new(name: &str, channel: usize, value: Complex64) -> Self {
        NamedTerm {
            name: name.to_string(),
            channel,
            value,
        }
    }
}

/// One diagram class: its coefficient and the terms it is summed from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassEntry {
    pub class: DiagramClass,
    pub label: String,
    /// Real part of the summed `terms`.
    pub coefficient: f64,
    pub omega_star: f64,
    pub terms: Vec<NamedTerm>,
    /// Principal-value parts kept for inspection; they do not enter the
    /// coefficient.
    #[serde(default)]
    pub principal_parts: Vec<NamedTerm>,
}

impl ClassEntry {
    fn new(class: DiagramClass, omega_star: f64, terms: Vec<NamedTerm>, principal_parts: Vec<NamedTerm>) -> Self {
        let coefficient = terms.iter().map(|t| t.value.re).sum();
        ClassEntry {
            class,
            label: class.label().to_string(),
            coefficient,
            omega_star,
            terms,
            principal_parts,
        }
    }

    pub fn summed(&self) -> Complex64 {
        self.terms.iter().map(|t| t.value).sum()
    }

    /// `|Im Σ terms|` relative to `Σ |terms|` (0 for an all-zero class).
    pub fn imaginary_residue(&self) -> f64 {
        let scale: f64 = self.terms.iter().map(|t| t.value.norm()).sum();
        if scale == 0.0 {
            0.0
        } else {
            self.summed().im.abs() / scale
        }
    }

    /// Coefficient restricted to one channel.
    pub fn channel_coefficient(&self, channel: usize) -> f64 {
        self.terms.iter().filter(|t| t.channel == channel).map(|t| t.value.re).sum()
    }
}

/// Operator values at the on-shell point, shared by the classes.
pub(super) struct OnShell {
    pub p: usize,
    pub ea: f64,
    pub ep: f64,
    pub omega: f64,
    pub targets: Vec<usize>,
    pub a: OperatorMatrix,
}

impl OnShell {
    pub fn new(model: &RadRecModel) -> Result<Self> {
        let omega = model.omega_star();
        let a = model.photons().coupling_at(omega).context(|| "photon coupling at ω*".to_string())?;
        Ok(OnShell {
            p: model.initial_state(),
            ea: model.energy_a(),
            ep: model.energy_p(),
            omega,
            targets: model.targets(),
            a,
        })
    }

    pub fn a(&self, i: usize, j: usize) -> Complex64 {
        self.a.entries()[(i, j)]
    }
}

/// Diagonal of `Γ_Q(ε_a)` with completeness weights; states degenerate with
/// `ε_a` are excluded.
pub(super) fn weighted_reduced_resolvent(model: &RadRecModel, e: f64) -> Vec<f64> {
    let tol = model.degeneracy_tol();
    let w = model.spectrum().completeness_weights();
    model
        .spectrum()
        .states()
        .iter()
        .map(|s| {
            if is_degenerate(e, s.energy, tol) {
                0.0
            } else {
                w[s.id] / (e - s.energy)
            }
        })
        .collect()
}

/// `Σ_n X_in g_n Y_nj`.
pub(super) fn sandwich(x: &OperatorMatrix, g: &[f64], y: &OperatorMatrix, i: usize, j: usize) -> Complex64 {
    g.iter()
        .enumerate()
        .filter(|(_, gn)| **gn != 0.0)
        .map(|(n, gn)| x.entries()[(i, n)] * *gn * y.entries()[(n, j)])
        .sum()
}

/// `Σ_q |⟨q|A(ω*)|p⟩|²`.
pub fn lowest_order_coefficient(model: &RadRecModel) -> Result<ClassEntry> {
    let os = OnShell::new(model)?;
    let terms = os
        .targets
        .iter()
        .map(|&q| NamedTerm::new("|A_qp|²", q, Complex64::new(os.a(q, os.p).norm_sqr(), 0.0)))
        .collect();
    Ok(ClassEntry::new(DiagramClass::LowestOrder, os.omega, terms, vec![]))
}

/// Self-energy on the bound line: two reduced-resolvent terms and two
/// model-space (derivative) terms.
pub fn se_bound_coefficient(model: &RadRecModel) -> Result<ClassEntry> {
    let os = OnShell::new(model)?;
    let p = os.p;
    let names = ["A·ΣΓ_QA", "AΓ_QΣ·A", "∂(AΣ)·A", "∂A·Σ·A"];
    if model.sigma().is_identically_zero() {
        let terms = os
            .targets
            .iter()
            .flat_map(|&q| names.iter().map(move |n| NamedTerm::new(n, q, Complex64::new(0.0, 0.0))))
            .collect();
        return Ok(ClassEntry::new(DiagramClass::SelfEnergyBound, os.omega, terms, vec![]));
    }
    let step = model.numerics().fd_step;
    let sigma = model.sigma().evaluate(os.ea)?;
    let dsigma = checked_derivative(model.sigma(), os.ea, step).context(|| "Σ derivative at ε_a".to_string())?;
    let da = model
        .photons()
        .coupling_derivative(os.omega, step)
        .context(|| "photon-coupling derivative at ω*".to_string())?;
    let gq = weighted_reduced_resolvent(model, os.ea);
    let mut terms = Vec::with_capacity(4 * os.targets.len());
    for &q in &os.targets {
        let t1 = os.a(p, q) * sandwich(&sigma, &gq, &os.a, q, p);
        let t2 = sandwich(&os.a, &gq, &sigma, p, q) * os.a(q, p);
        let mut t3 = Complex64::new(0.0, 0.0);
        let mut t4 = Complex64::new(0.0, 0.0);
        for &qp in &os.targets {
            let da_sigma_a = da.entries()[(p, q)] * sigma.entries()[(q, qp)] * os.a(qp, p);
            t3 += os.a(p, q) * dsigma.entries()[(q, qp)] * os.a(qp, p) + da_sigma_a;
            t4 += da_sigma_a;
        }
        terms.push(NamedTerm::new(names[0], q, t1));
        terms.push(NamedTerm::new(names[1], q, t2));
        terms.push(NamedTerm::new(names[2], q, t3));
        terms.push(NamedTerm::new(names[3], q, t4));
    }
    Ok(ClassEntry::new(DiagramClass::SelfEnergyBound, os.omega, terms, vec![]))
}

/// Vertex correction; no model-space terms arise.
pub fn vertex_coefficient(model: &RadRecModel) -> Result<ClassEntry> {
    let os = OnShell::new(model)?;
    let p = os.p;
    let lambda = model.lambda_vx().evaluate(os.ea)?;
    let s = model.vertex_sign();
    let mut terms = Vec::with_capacity(2 * os.targets.len());
    for &q in &os.targets {
        terms.push(NamedTerm::new("Λ·A", q, lambda.entries()[(p, q)] * os.a(q, p) * s));
        terms.push(NamedTerm::new("A·Λ", q, os.a(p, q) * lambda.entries()[(q, p)] * s));
    }
    Ok(ClassEntry::new(DiagramClass::Vertex, os.omega, terms, vec![]))
}

/// Principal-value and pole parts of `Σ_n X_qn Y_np / (ε_p − ε_n + i0)`
/// (and of the mirrored product), continuum by pole subtraction, bound
/// states directly.
pub(super) struct FreeLine {
    /// `(A Γ Σ)_qp`: (principal, pole)
    pub forward: (Complex64, Complex64),
    /// `(Σ Γ A)_pq` with the conjugate pole: (principal, pole)
    pub mirror: (Complex64, Complex64),
}

pub(super) fn free_line(model: &RadRecModel, os: &OnShell, sigma_p: &OperatorMatrix, q: usize) -> Result<FreeLine> {
    let spectrum = model.spectrum();
    let grid = PlemeljGrid::from_spectrum(spectrum)?;
    let cont = spectrum.continuum_indices();
    let p = os.p;
    let f: Vec<Complex64> = cont.iter().map(|&n| os.a(q, n) * sigma_p.entries()[(n, p)]).collect();
    let g: Vec<Complex64> = cont.iter().map(|&n| sigma_p.entries()[(p, n)] * os.a(n, q)).collect();
    let rf = plemelj_integrate(&f, os.ep, &grid)?;
    let rg = plemelj_integrate(&g, os.ep, &grid)?;
    let tol = model.degeneracy_tol();
    let mut bound_f = Complex64::new(0.0, 0.0);
    let mut bound_g = Complex64::new(0.0, 0.0);
    for n in spectrum.bound_indices() {
        let en = spectrum.states()[n].energy;
        if is_degenerate(os.ep, en, tol) {
            continue;
        }
        bound_f += os.a(q, n) * sigma_p.entries()[(n, p)] / (os.ep - en);
        bound_g += sigma_p.entries()[(p, n)] * os.a(n, q) / (os.ep - en);
    }
    // 1/(ε_p − x + i0) = −[1/(x − ε_p − i0)]: principal flips sign, pole keeps it.
    Ok(FreeLine {
        forward: (bound_f - rf.principal, rf.pole),
        mirror: (bound_g - rg.principal, -rg.pole),
    })
}

/// Self-energy on the free (outgoing) line; only the pole parts contribute.
pub fn se_free_coefficient(model: &RadRecModel) -> Result<ClassEntry> {
    let os = OnShell::new(model)?;
    let p = os.p;
    let names = ["A·AΓ_poleΣ", "ΣΓ_poleA·A"];
    if model.sigma().is_identically_zero() {
        let terms = os
            .targets
            .iter()
            .flat_map(|&q| names.iter().map(move |n| NamedTerm::new(n, q, Complex64::new(0.0, 0.0))))
            .collect();
        return Ok(ClassEntry::new(DiagramClass::SelfEnergyFree, os.omega, terms, vec![]));
    }
    let sigma_p = model.sigma().evaluate(os.ep)?;
    let mut terms = Vec::new();
    let mut principal = Vec::new();
    for &q in &os.targets {
        let line = free_line(model, &os, &sigma_p, q)?;
        terms.push(NamedTerm::new(names[0], q, os.a(p, q) * line.forward.1));
        terms.push(NamedTerm::new(names[1], q, line.mirror.1 * os.a(q, p)));
        principal.push(NamedTerm::new("A·AΓ_pvΣ", q, os.a(p, q) * line.forward.0));
        principal.push(NamedTerm::new("ΣΓ_pvA·A", q, line.mirror.0 * os.a(q, p)));
    }
    Ok(ClassEntry::new(DiagramClass::SelfEnergyFree, os.omega, terms, principal))
}

/// `Σ_k Δk_k Δ_γ(ω* − ω_k) Σ_q |A_qp(ω_k)|²`: the lowest-order sum over
/// photon modes with the energy delta smeared to width `γ`.
pub fn smeared_lowest_order(model: &RadRecModel, gamma: f64) -> Result<f64> {
    let p = model.initial_state();
    let targets = model.targets();
    let omega_star = model.omega_star();
    let mut total = 0.0;
    for mode in model.photons().modes() {
        let a = model.photons().coupling().evaluate(mode.omega)?;
        let strength: f64 = targets.iter().map(|&q| a.entries()[(q, p)].norm_sqr()).sum();
        total += mode.weight * delta_gamma(omega_star - mode.omega, gamma)? * strength;
    }
    Ok(total)
}

/// Continuum integral in `Σ_q A_pq (AΓΣ)_qp` computed two ways.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreeIntegralComparison {
    pub eta: f64,
    /// Direct quadrature with `1/(ε_p − x + iη)`.
    pub regularized: Complex64,
    /// Principal value plus pole from pole subtraction.
    pub plemelj: Complex64,
    pub pole: Complex64,
}

pub fn eta_regularized_free_integral(model: &RadRecModel, eta: f64) -> Result<FreeIntegralComparison> {
    let os = OnShell::new(model)?;
    let spectrum = model.spectrum();
    let grid = PlemeljGrid::from_spectrum(spectrum)?;
    let cont = spectrum.continuum_indices();
    let sigma_p = model.sigma().evaluate(os.ep)?;
    let p = os.p;
    let mut regularized = Complex64::new(0.0, 0.0);
    let mut plemelj = Complex64::new(0.0, 0.0);
    let mut pole = Complex64::new(0.0, 0.0);
    for &q in &os.targets {
        let f: Vec<Complex64> = cont.iter().map(|&n| os.a(q, n) * sigma_p.entries()[(n, p)]).collect();
        // 1/(ε_p − x + iη) = −1/(x − ε_p − iη): conjugate the regulator
        let conj_f: Vec<Complex64> = f.iter().map(|z| z.conj()).collect();
        let reg = -eta_regularized_integral(&conj_f, os.ep, eta, &grid)?.conj();
        let r = plemelj_integrate(&f, os.ep, &grid)?;
        regularized += os.a(p, q) * reg;
        plemelj += os.a(p, q) * (r.pole - r.principal);
        pole += os.a(p, q) * r.pole;
    }
    if !regularized.re.is_finite() {
        return Err(Error::InvalidParameter(format!("η = {eta} gives a non-finite quadrature")));
    }
    Ok(FreeIntegralComparison {
        eta,
        regularized,
        plemelj,
        pole,
    })
}
