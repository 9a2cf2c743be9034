//! Resolvents and the numerical treatment of their poles.
//!
//! Poles sitting on a discretized continuum are handled by pole subtraction:
//! `∫ f(x)/(x - x0 + iη) dx → PV ∫ f/(x - x0) - iπ f(x0)`, where the principal
//! value is computed as `∫ (f(x) - f(x0))/(x - x0) dx + f(x0) ln((b-x0)/(x0-a))`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;
use crate::spectral::{is_degenerate, ModelSpace, OperatorMatrix, Spectrum, DEFAULT_DEGENERACY_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlemeljResult {
    pub principal: Complex64,
    pub pole: Complex64,
    pub total: Complex64,
}

impl PlemeljResult {
    fn new(principal: Complex64, pole: Complex64) -> Self {
        PlemeljResult {
            principal,
            pole,
            total: principal + pole,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ResolventKind {
    Full,
    ReducedQ,
    ProjectedP { e_prime: f64 },
}

/// Resolvent request: energy, regularization and kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolventSpec {
    pub energy: f64,
    pub eta: f64,
    pub kind: ResolventKind,
}

impl ResolventSpec {
    /// Evaluates the spec. `ReducedQ` and `ProjectedP` need a model space.
    pub fn build(&self, spectrum: &Spectrum, model: Option<&ModelSpace>) -> Result<OperatorMatrix> {
        if !(self.eta >= 0.0) {
            return Err(Error::InvalidParameter(format!("eta must be nonnegative, got {}", self.eta)));
        }
        match self.kind {
            ResolventKind::Full => resolvent(spectrum, self.energy, self.eta),
            ResolventKind::ReducedQ => {
                let model = model.ok_or_else(|| Error::InvalidInput("reduced resolvent needs a model space".into()))?;
                reduced_resolvent(spectrum, model, self.energy)
            }
            ResolventKind::ProjectedP { e_prime } => {
                let model = model.ok_or_else(|| Error::InvalidInput("projected resolvent needs a model space".into()))?;
                let block = model.block_at(spectrum, e_prime)?;
                let (p, _) = crate::spectral::projectors(spectrum, &block)?;
                projected_resolvent(self.energy, e_prime, &p)
            }
        }
    }
}

/// Default regularization: `1e-6` times the largest spectral gap.
pub fn default_eta(spectrum: &Spectrum) -> f64 {
    let gap = spectrum.max_gap();
    1e-6 * if gap > 0.0 { gap } else { 1.0 }
}

/// `Γ(E) = 1/(E - H0 + iη)` with the default degeneracy tolerance.
pub fn resolvent(spectrum: &Spectrum, energy: f64, eta: f64) -> Result<OperatorMatrix> {
    resolvent_with_tol(spectrum, energy, eta, DEFAULT_DEGENERACY_TOL)
}

pub fn resolvent_with_tol(spectrum: &Spectrum, energy: f64, eta: f64, tol: f64) -> Result<OperatorMatrix> {
    if !(eta >= 0.0) || !eta.is_finite() {
        return Err(Error::InvalidParameter(format!("eta must be nonnegative, got {eta}")));
    }
    if eta == 0.0 {
        let ids = spectrum.degenerate_with(energy, tol);
        if !ids.is_empty() {
            return Err(Error::SingularResolvent { energy, ids });
        }
    }
    let diag: Vec<Complex64> = spectrum
        .energies()
        .iter()
        .map(|&e| Complex64::new(energy - e, eta).inv())
        .collect();
    Ok(OperatorMatrix::diagonal(&diag))
}

/// `Γ_Q(E) = Q/(E - H0)`: zero on P, `1/(E - ε_n)` on Q.
pub fn reduced_resolvent(spectrum: &Spectrum, model: &ModelSpace, energy: f64) -> Result<OperatorMatrix> {
    model.validate(spectrum)?;
    let tol = model.degeneracy_tol();
    let singular: Vec<usize> = spectrum
        .states()
        .iter()
        .filter(|s| !model.contains(s.id) && is_degenerate(energy, s.energy, tol))
        .map(|s| s.id)
        .collect();
    if !singular.is_empty() {
        return Err(Error::SingularResolvent { energy, ids: singular });
    }
    let diag: Vec<f64> = spectrum
        .states()
        .iter()
        .map(|s| if model.contains(s.id) { 0.0 } else { 1.0 / (energy - s.energy) })
        .collect();
    Ok(OperatorMatrix::diagonal_real(&diag))
}

/// `Γ_P(E') = P'/(E - E')`.
pub fn projected_resolvent(energy: f64, e_prime: f64, p_prime: &OperatorMatrix) -> Result<OperatorMatrix> {
    if is_degenerate(energy, e_prime, DEFAULT_DEGENERACY_TOL) {
        return Err(Error::QuasiDegenerate { energy, e_prime });
    }
    Ok(p_prime.scale_real(1.0 / (energy - e_prime)))
}

/// Continuum nodes and weights with the integration interval.
#[derive(Debug, Clone, PartialEq)]
pub struct PlemeljGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub lower: f64,
    pub upper: f64,
}

impl PlemeljGrid {
    pub fn new(nodes: Vec<f64>, weights: Vec<f64>, lower: f64, upper: f64) -> Result<Self> {
        if nodes.len() != weights.len() {
            return Err(Error::InvalidInput("nodes and weights differ in length".into()));
        }
        if nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("grid nodes must be strictly increasing".into()));
        }
        Ok(PlemeljGrid {
            nodes,
            weights,
            lower,
            upper,
        })
    }

    /// Uniform trapezoid grid.
    pub fn uniform(lower: f64, upper: f64, n: usize) -> Self {
        let nodes = quad::linspace(lower, upper, n);
        let weights = quad::trapezoid_weights(&nodes);
        PlemeljGrid {
            nodes,
            weights,
            lower,
            upper,
        }
    }

    /// The continuum part of a spectrum.
    pub fn from_spectrum(spectrum: &Spectrum) -> Result<Self> {
        let (lower, upper) = spectrum
            .continuum_interval()
            .ok_or(Error::InsufficientGrid { nodes: 0 })?;
        let ids = spectrum.continuum_indices();
        let nodes = ids.iter().map(|&i| spectrum.states()[i].energy).collect();
        let weights = ids.iter().map(|&i| spectrum.states()[i].weight.unwrap_or(0.0)).collect();
        Self::new(nodes, weights, lower, upper)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Errors unless `x0` is strictly inside the interval (edge poles rejected).
    pub fn check_interior(&self, x0: f64) -> Result<()> {
        let tol = DEFAULT_DEGENERACY_TOL * x0.abs().max(1.0);
        if !(x0 > self.lower + tol && x0 < self.upper - tol) {
            return Err(Error::PoleOutsideGrid {
                x0,
                lower: self.lower,
                upper: self.upper,
            });
        }
        Ok(())
    }
}

/// `∫ f(x)/(x - x0 + i0⁺) dx` split into principal value and pole parts.
pub fn plemelj_integrate(f: &[Complex64], x0: f64, grid: &PlemeljGrid) -> Result<PlemeljResult> {
    if grid.len() < 4 {
        return Err(Error::InsufficientGrid { nodes: grid.len() });
    }
    if f.len() != grid.len() {
        return Err(Error::InvalidInput(format!(
            "{} samples for {} grid nodes",
            f.len(),
            grid.len()
        )));
    }
    grid.check_interior(x0)?;
    let (f0, df0) = quad::cubic_local(&grid.nodes, f, x0);
    let scale = (grid.upper - grid.lower).abs();
    let mut subtracted = Complex64::new(0.0, 0.0);
    for (i, ((&x, &w), &fx)) in grid.nodes.iter().zip(&grid.weights).zip(f).enumerate() {
        let dx = x - x0;
        let g = if dx.abs() <= 1e-8 * scale {
            node_derivative(&grid.nodes, f, i).unwrap_or(df0)
        } else {
            (fx - f0) / dx
        };
        subtracted += g * w;
    }
    let log_term = ((grid.upper - x0) / (x0 - grid.lower)).ln();
    let principal = subtracted + f0 * log_term;
    let pole = Complex64::new(0.0, -PI) * f0;
    Ok(PlemeljResult::new(principal, pole))
}

/// Derivative at node `i` from the centred five-point stencil, so that the
/// subtracted integrand keeps the symmetry of `f` about an on-node pole.
fn node_derivative(nodes: &[f64], f: &[Complex64], i: usize) -> Option<Complex64> {
    if i < 2 || i + 2 >= nodes.len() {
        return None;
    }
    Some(quad::lagrange(&nodes[i - 2..=i + 2], &f[i - 2..=i + 2], nodes[i]).1)
}

/// Direct quadrature of `f(x)/(x - x0 + iη)`; the finite-η route used as an
/// oracle for [`plemelj_integrate`].
pub fn eta_regularized_integral(f: &[Complex64], x0: f64, eta: f64, grid: &PlemeljGrid) -> Result<Complex64> {
    if !(eta > 0.0) {
        return Err(Error::InvalidParameter(format!("eta must be positive, got {eta}")));
    }
    if f.len() != grid.len() {
        return Err(Error::InvalidInput("sample count does not match grid".into()));
    }
    Ok(grid
        .nodes
        .iter()
        .zip(&grid.weights)
        .zip(f)
        .map(|((&x, &w), &fx)| fx * w / Complex64::new(x - x0, eta))
        .sum())
}

/// Lorentzian regularization of the delta function, `(1/π) γ/(a² + γ²)`.
pub fn delta_gamma(a: f64, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidParameter(format!("gamma must be positive, got {gamma}")));
    }
    Ok(gamma / (PI * (a * a + gamma * gamma)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::build_spectrum;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn two_level() -> Spectrum {
        build_spectrum(&[1.0, 3.0], None).unwrap()
    }

    #[test]
    fn resolvent_examples() {
        let s = two_level();
        assert_eq!(resolvent(&s, 2.0, 0.0).unwrap(), OperatorMatrix::diagonal_real(&[1.0, -1.0]));
        let r = resolvent(&s, 1.0, 0.1).unwrap();
        assert!((r.entries()[(0, 0)] - c(0.0, -10.0)).norm() < 1e-12);
        assert_eq!(resolvent(&s, 5.0, 0.0).unwrap(), OperatorMatrix::diagonal_real(&[0.25, 0.5]));
        assert_eq!(
            resolvent(&s, 3.0, 0.0),
            Err(Error::SingularResolvent { energy: 3.0, ids: vec![1] })
        );
        assert!(matches!(resolvent(&s, 2.0, -1.0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn reduced_resolvent_examples() {
        let s = two_level();
        let p0 = ModelSpace::with_default_tol([0]);
        assert_eq!(reduced_resolvent(&s, &p0, 1.0).unwrap(), OperatorMatrix::diagonal_real(&[0.0, -0.5]));
        let all = ModelSpace::with_default_tol([0, 1]);
        assert!(reduced_resolvent(&s, &all, 2.7).unwrap().is_zero());
        assert_eq!(
            reduced_resolvent(&s, &p0, 3.0),
            Err(Error::SingularResolvent { energy: 3.0, ids: vec![1] })
        );
    }

    #[test]
    fn projected_resolvent_examples() {
        let p = OperatorMatrix::diagonal_real(&[1.0, 0.0]);
        assert_eq!(projected_resolvent(2.0, 1.0, &p).unwrap(), p);
        assert_eq!(projected_resolvent(1.0, 2.0, &p).unwrap(), OperatorMatrix::diagonal_real(&[-1.0, 0.0]));
        assert!(matches!(projected_resolvent(1.0, 1.0, &p), Err(Error::QuasiDegenerate { .. })));
    }

    #[test]
    fn resolvent_identity() {
        let s = build_spectrum(&[-1.0, -0.25], Some(&crate::spectral::ContinuumGrid::uniform(0.0, 2.0, 7))).unwrap();
        for &(e, eta) in &[(0.3, 1e-3), (-1.0, 0.5), (5.0, 1e-8)] {
            let g = resolvent(&s, e, eta).unwrap();
            let lhs = OperatorMatrix::diagonal(
                &s.energies().iter().map(|&en| c(e - en, eta)).collect::<Vec<_>>(),
            );
            let prod = &lhs * &g;
            assert!(prod.max_abs_diff(&OperatorMatrix::identity(s.dim())) < 1e-13);
        }
    }

    #[test]
    fn resolvent_spec_dispatch() {
        let s = two_level();
        let model = ModelSpace::with_default_tol([0]);
        let spec = ResolventSpec { energy: 2.0, eta: 0.0, kind: ResolventKind::ProjectedP { e_prime: 1.0 } };
        assert_eq!(spec.build(&s, Some(&model)).unwrap(), OperatorMatrix::diagonal_real(&[1.0, 0.0]));
        let spec = ResolventSpec { energy: 2.0, eta: 0.0, kind: ResolventKind::ReducedQ };
        assert!(spec.build(&s, None).is_err());
    }

    #[test]
    fn plemelj_examples() {
        let grid = PlemeljGrid::uniform(-1.0, 1.0, 41);
        let ones = vec![c(1.0, 0.0); grid.len()];
        let r = plemelj_integrate(&ones, 0.0, &grid).unwrap();
        assert!(r.principal.norm() < 1e-13);
        assert!((r.pole - c(0.0, -PI)).norm() < 1e-13);

        let lin: Vec<Complex64> = grid.nodes.iter().map(|&x| c(x, 0.0)).collect();
        let r = plemelj_integrate(&lin, 0.0, &grid).unwrap();
        assert!((r.principal - c(2.0, 0.0)).norm() < 1e-12);
        assert!(r.pole.norm() < 1e-14);

        let lor: Vec<Complex64> = grid.nodes.iter().map(|&x| c(1.0 / (x * x + 4.0), 0.0)).collect();
        let r = plemelj_integrate(&lor, 0.0, &grid).unwrap();
        assert!(r.principal.norm() < 1e-13);
        assert!((r.pole - c(0.0, -PI / 4.0)).norm() < 1e-12);
        assert_eq!(r.total, r.principal + r.pole);
    }

    #[test]
    fn plemelj_errors() {
        let grid = PlemeljGrid::uniform(-1.0, 1.0, 10);
        let f = vec![c(1.0, 0.0); 10];
        assert!(matches!(plemelj_integrate(&f, 1.5, &grid), Err(Error::PoleOutsideGrid { .. })));
        assert!(matches!(plemelj_integrate(&f, -1.0, &grid), Err(Error::PoleOutsideGrid { .. })));
        let small = PlemeljGrid::uniform(-1.0, 1.0, 3);
        assert_eq!(
            plemelj_integrate(&f[..3], 0.0, &small),
            Err(Error::InsufficientGrid { nodes: 3 })
        );
    }

    #[test]
    fn plemelj_on_gauss_legendre_nodes() {
        // Off-node pole on a non-uniform grid: PV ∫_{-1}^{1} e^x/(x - 0.3) dx
        let (nodes, weights) = quad::gauss_legendre(-1.0, 1.0, 80);
        let grid = PlemeljGrid::new(nodes, weights, -1.0, 1.0).unwrap();
        let f: Vec<Complex64> = grid.nodes.iter().map(|&x| c(x.exp(), 0.0)).collect();
        let r = plemelj_integrate(&f, 0.3, &grid).unwrap();
        // reference from adaptive quadrature of the subtracted integrand
        let x0 = 0.3f64;
        let reference = quad::integrate_adaptive(
            |x| if (x - x0).abs() < 1e-12 { x0.exp() } else { (x.exp() - x0.exp()) / (x - x0) },
            -1.0,
            1.0,
            1e-14,
        )
        .unwrap()
            + x0.exp() * ((1.0 - x0) / (x0 + 1.0)).ln();
        assert!((r.principal.re - reference).abs() < 1e-6, "{} vs {reference}", r.principal.re);
        assert!((r.pole.im + PI * x0.exp()).abs() < 1e-6);
    }

    #[test]
    fn delta_gamma_examples() {
        assert!((delta_gamma(0.0, 0.1).unwrap() - 10.0 / PI).abs() < 1e-14);
        let g = 0.37;
        assert!((delta_gamma(g, g).unwrap() - 1.0 / (2.0 * PI * g)).abs() < 1e-15);
        assert!(matches!(delta_gamma(0.0, 0.0), Err(Error::InvalidParameter(_))));
        assert!(matches!(delta_gamma(0.0, -1.0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn default_eta_scales_with_gap() {
        let s = build_spectrum(&[0.0, 2.0, 2.5], None).unwrap();
        assert!((default_eta(&s) - 2e-6).abs() < 1e-18);
    }
}
