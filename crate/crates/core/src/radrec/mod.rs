//! Radiative recombination: a continuum electron `p` is captured into the
//! bound state `a` with emission of a photon of energy `ω* = ε_p − ε_a`.
//!
//! Each diagram class contributes a real coefficient multiplying
//! `2πδ(ε_p − ε_a − ω)` in `2 Im⟨p|−H_eff|p⟩`; the coefficients are turned
//! into cross sections and paired with an extracted amplitude.

mod amplitude;
mod coefficients;
mod cuts;
mod report;

pub use amplitude::{amplitude_pairings, extract_amplitude, piece_factor, AmplitudePiece, AmplitudeTerm, ChannelAmplitude, Pairing, PairingSide};
pub use coefficients::{
    eta_regularized_free_integral, lowest_order_coefficient, se_bound_coefficient, se_free_coefficient,
    smeared_lowest_order, vertex_coefficient, ClassEntry, FreeIntegralComparison, NamedTerm,
};
pub use cuts::{enumerate_class_cuts, enumerate_cuts, CutEnvironment, CutPlacement, Residual, ResidualTreatment};
pub use report::{assemble_cross_section, build_report, ChannelResult, ContributionReport, CrossSection, Warning};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, ResultExt};
use crate::greens::checked_derivative;
use crate::operator::{DerivativeCheck, EnergyDependentOperator, RELATIVE_FD_STEP};
use crate::quad;
use crate::spectral::{is_degenerate, ModelSpace, OperatorMatrix, Spectrum, StateKind, DEFAULT_DEGENERACY_TOL};
use crate::term::{OperatorRef, TermExpression};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotonMode {
    pub omega: f64,
    pub weight: f64,
}

/// Photon channels and the coupling family `A(ω)`.
#[derive(Debug, Clone)]
pub struct PhotonGrid {
    modes: Vec<PhotonMode>,
    coupling: EnergyDependentOperator,
}

impl PhotonGrid {
    pub fn new(modes: Vec<PhotonMode>, coupling: EnergyDependentOperator) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::InvalidModel("photon grid needs at least one mode".into()));
        }
        for (i, m) in modes.iter().enumerate() {
            if !(m.omega >= 0.0) || !m.omega.is_finite() {
                return Err(Error::InvalidModel(format!("photon mode {i}: omega must be finite and ≥ 0")));
            }
            if !(m.weight > 0.0) || !m.weight.is_finite() {
                return Err(Error::InvalidModel(format!("photon mode {i}: weight must be positive")));
            }
        }
        if modes.windows(2).any(|w| w[1].omega <= w[0].omega) {
            return Err(Error::InvalidModel("photon energies must be strictly increasing".into()));
        }
        Ok(PhotonGrid { modes, coupling })
    }

    /// `n` modes on `[min, max]` with trapezoid weights.
    pub fn uniform(min: f64, max: f64, n: usize, coupling: EnergyDependentOperator) -> Result<Self> {
        if n < 2 || !(min < max) {
            return Err(Error::InvalidModel(format!("bad photon grid [{min}, {max}] × {n}")));
        }
        let omegas = quad::linspace(min, max, n);
        let weights = quad::trapezoid_weights(&omegas);
        Self::new(
            omegas.into_iter().zip(weights).map(|(omega, weight)| PhotonMode { omega, weight }).collect(),
            coupling,
        )
    }

    pub fn modes(&self) -> &[PhotonMode] {
        &self.modes
    }

    pub fn omegas(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.omega).collect()
    }

    pub fn coupling(&self) -> &EnergyDependentOperator {
        &self.coupling
    }

    pub fn range(&self) -> (f64, f64) {
        (self.modes[0].omega, self.modes[self.modes.len() - 1].omega)
    }

    fn check_inside(&self, omega: f64) -> Result<()> {
        let (lo, hi) = self.range();
        if !(omega >= lo && omega <= hi) {
            return Err(Error::PoleOutsideGrid { x0: omega, lower: lo, upper: hi });
        }
        Ok(())
    }

    /// `A(ω)` by entrywise cubic interpolation of the four nearest modes.
    pub fn coupling_at(&self, omega: f64) -> Result<OperatorMatrix> {
        self.check_inside(omega)?;
        let omegas = self.omegas();
        let width = omegas.len().min(4);
        let s = quad::window_start(&omegas, omega, width);
        let samples = omegas[s..s + width]
            .iter()
            .map(|&w| self.coupling.evaluate(w))
            .collect::<Result<Vec<_>>>()?;
        let dim = self.coupling.dim();
        Ok(OperatorMatrix::from_fn(dim, |i, j| {
            let ys: Vec<_> = samples.iter().map(|m| m.entries()[(i, j)]).collect();
            quad::lagrange(&omegas[s..s + width], &ys, omega).0
        }))
    }

    /// `dA/dω` from the coupling family, cross-checked when analytic.
    pub fn coupling_derivative(&self, omega: f64, relative_step: f64) -> Result<OperatorMatrix> {
        self.check_inside(omega)?;
        checked_derivative(&self.coupling, omega, relative_step)
    }

    /// Channel width `Δk` interpolated at `omega`.
    pub fn weight_at(&self, omega: f64) -> Result<f64> {
        self.check_inside(omega)?;
        let weights: Vec<f64> = self.modes.iter().map(|m| m.weight).collect();
        Ok(quad::cubic_local_real(&self.omegas(), &weights, omega))
    }
}

/// Numerical knobs shared by the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Numerics {
    /// Relative finite-difference step.
    pub fd_step: f64,
    /// Regularization for η-based diagnostics; `None` uses the spectral default.
    pub eta: Option<f64>,
}

impl Default for Numerics {
    fn default() -> Self {
        Numerics {
            fd_step: RELATIVE_FD_STEP,
            eta: None,
        }
    }
}

/// Everything the pipeline needs about one capture process.
#[derive(Debug, Clone)]
pub struct RadRecModel {
    spectrum: Spectrum,
    model: ModelSpace,
    photons: PhotonGrid,
    sigma: EnergyDependentOperator,
    lambda_vx: EnergyDependentOperator,
    v_i: f64,
    vertex_sign: f64,
    capture_target: usize,
    initial_state: usize,
    numerics: Numerics,
}

/// Builder input for [`RadRecModel::new`].
#[derive(Debug, Clone)]
pub struct RadRecParts {
    pub spectrum: Spectrum,
    pub photons: PhotonGrid,
    pub sigma: EnergyDependentOperator,
    pub lambda_vx: EnergyDependentOperator,
    pub v_i: f64,
    pub vertex_sign: f64,
    pub capture_target: usize,
    pub initial_state: usize,
    pub degeneracy_tol: f64,
    pub numerics: Numerics,
}

impl RadRecParts {
    pub fn new(
        spectrum: Spectrum,
        photons: PhotonGrid,
        sigma: EnergyDependentOperator,
        lambda_vx: EnergyDependentOperator,
        capture_target: usize,
        initial_state: usize,
    ) -> Self {
        RadRecParts {
            spectrum,
            photons,
            sigma,
            lambda_vx,
            v_i: 1.0,
            vertex_sign: -1.0,
            capture_target,
            initial_state,
            degeneracy_tol: DEFAULT_DEGENERACY_TOL,
            numerics: Numerics::default(),
        }
    }
}

impl RadRecModel {
    pub fn new(parts: RadRecParts) -> Result<Self> {
        let RadRecParts {
            spectrum,
            photons,
            sigma,
            lambda_vx,
            v_i,
            vertex_sign,
            capture_target,
            initial_state,
            degeneracy_tol,
            numerics,
        } = parts;
        let dim = spectrum.dim();
        let target = spectrum
            .state(capture_target)
            .map_err(|_| Error::InvalidModel(format!("capture target {capture_target} out of range for dimension {dim}")))?;
        let initial = spectrum
            .state(initial_state)
            .map_err(|_| Error::InvalidModel(format!("initial state {initial_state} out of range for dimension {dim}")))?;
        if target.kind != StateKind::Bound {
            return Err(Error::InvalidModel(format!("capture target {capture_target} is not a bound state")));
        }
        if !(initial.energy > target.energy) {
            return Err(Error::InvalidModel(format!(
                "emission kinematics: ε_p = {} must exceed ε_a = {}",
                initial.energy, target.energy
            )));
        }
        if !(v_i > 0.0) || !v_i.is_finite() {
            return Err(Error::InvalidModel(format!("v_i must be positive, got {v_i}")));
        }
        if vertex_sign != 1.0 && vertex_sign != -1.0 {
            return Err(Error::InvalidModel(format!("vertex_sign must be +1 or -1, got {vertex_sign}")));
        }
        if !(numerics.fd_step > 0.0 && numerics.fd_step < 1.0) {
            return Err(Error::InvalidModel(format!("fd_step must lie in (0, 1), got {}", numerics.fd_step)));
        }
        if let Some(eta) = numerics.eta {
            if !(eta > 0.0) || !eta.is_finite() {
                return Err(Error::InvalidModel(format!("eta must be positive, got {eta}")));
            }
        }
        for (name, op) in [("photon coupling", photons.coupling()), ("sigma", &sigma), ("lambda", &lambda_vx)] {
            if op.dim() != dim {
                return Err(Error::InvalidModel(format!(
                    "{name} `{}` has dimension {} but the spectrum has {dim}",
                    op.tag(),
                    op.dim()
                )));
            }
        }
        let (ea, ep) = (target.energy, initial.energy);
        for (name, op) in [("sigma", &sigma), ("lambda", &lambda_vx)] {
            for e in [ea, ep] {
                let m = op.evaluate(e).context(|| format!("{name} on [ε_a, ε_p]"))?;
                if !m.is_finite() {
                    return Err(Error::InvalidModel(format!("{name} is not finite at E = {e}")));
                }
            }
        }
        for mode in photons.modes() {
            let m = photons.coupling().evaluate(mode.omega).context(|| "photon coupling".to_string())?;
            if !m.is_finite() {
                return Err(Error::InvalidModel(format!("photon coupling is not finite at ω = {}", mode.omega)));
            }
        }
        let model = ModelSpace::degenerate_with(&spectrum, ep, degeneracy_tol)?;
        Ok(RadRecModel {
            spectrum,
            model,
            photons,
            sigma,
            lambda_vx,
            v_i,
            vertex_sign,
            capture_target,
            initial_state,
            numerics,
        })
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    /// States degenerate with the initial state.
    pub fn model_space(&self) -> &ModelSpace {
        &self.model
    }

    pub fn photons(&self) -> &PhotonGrid {
        &self.photons
    }

    pub fn sigma(&self) -> &EnergyDependentOperator {
        &self.sigma
    }

    pub fn lambda_vx(&self) -> &EnergyDependentOperator {
        &self.lambda_vx
    }

    pub fn v_i(&self) -> f64 {
        self.v_i
    }

    pub fn vertex_sign(&self) -> f64 {
        self.vertex_sign
    }

    pub fn capture_target(&self) -> usize {
        self.capture_target
    }

    pub fn initial_state(&self) -> usize {
        self.initial_state
    }

    pub fn numerics(&self) -> Numerics {
        self.numerics
    }

    pub fn degeneracy_tol(&self) -> f64 {
        self.model.degeneracy_tol()
    }

    pub fn energy_a(&self) -> f64 {
        self.spectrum.states()[self.capture_target].energy
    }

    pub fn energy_p(&self) -> f64 {
        self.spectrum.states()[self.initial_state].energy
    }

    /// `ω* = ε_p − ε_a`.
    pub fn omega_star(&self) -> f64 {
        self.energy_p() - self.energy_a()
    }

    /// Bound states degenerate with the capture target (the channels `q`).
    pub fn targets(&self) -> Vec<usize> {
        let ea = self.energy_a();
        self.spectrum
            .states()
            .iter()
            .filter(|s| s.is_bound() && is_degenerate(ea, s.energy, self.degeneracy_tol()))
            .map(|s| s.id)
            .collect()
    }

    /// Copy with Σ and Λ multiplied by `eps`.
    pub fn scaled(&self, eps: f64) -> Self {
        RadRecModel {
            sigma: self.sigma.scaled(eps),
            lambda_vx: self.lambda_vx.scaled(eps),
            ..self.clone()
        }
    }

    pub fn with_vertex_sign(mut self, sign: f64) -> Result<Self> {
        if sign != 1.0 && sign != -1.0 {
            return Err(Error::InvalidModel(format!("vertex_sign must be +1 or -1, got {sign}")));
        }
        self.vertex_sign = sign;
        Ok(self)
    }

    pub fn with_v_i(mut self, v_i: f64) -> Result<Self> {
        if !(v_i > 0.0) || !v_i.is_finite() {
            return Err(Error::InvalidModel(format!("v_i must be positive and finite, got {v_i}")));
        }
        self.v_i = v_i;
        Ok(self)
    }

    /// Copy with the photon grid replaced.
    pub fn with_photons(&self, photons: PhotonGrid) -> Result<Self> {
        if photons.coupling().dim() != self.spectrum.dim() {
            return Err(Error::InvalidModel("photon coupling dimension mismatch".into()));
        }
        Ok(RadRecModel {
            photons,
            ..self.clone()
        })
    }

    /// Cross-checks every analytic derivative the pipeline uses against
    /// finite differences at the point where it is used.
    pub fn check_derivatives(&self) -> Result<Vec<(String, DerivativeCheck)>> {
        let step = self.numerics.fd_step;
        let mut out = Vec::new();
        let checks = [
            ("sigma", &self.sigma, self.energy_a()),
            ("lambda", &self.lambda_vx, self.energy_a()),
            ("photon coupling", self.photons.coupling(), self.omega_star()),
        ];
        for (name, op, e) in checks {
            if let Some(c) = op.check_derivative(e, step).context(|| format!("{name} derivative"))? {
                out.push((name.to_string(), c));
            }
        }
        Ok(out)
    }
}

/// The four diagram classes in report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiagramClass {
    LowestOrder,
    SelfEnergyBound,
    Vertex,
    SelfEnergyFree,
}

impl DiagramClass {
    pub const ALL: [DiagramClass; 4] = [
        DiagramClass::LowestOrder,
        DiagramClass::SelfEnergyBound,
        DiagramClass::Vertex,
        DiagramClass::SelfEnergyFree,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            DiagramClass::LowestOrder => "lowest-order",
            DiagramClass::SelfEnergyBound => "self-energy-bound",
            DiagramClass::Vertex => "vertex",
            DiagramClass::SelfEnergyFree => "self-energy-free",
        }
    }

    /// Ladder terms of the class, including mirrored orderings.
    pub fn terms(&self) -> Vec<TermExpression> {
        use OperatorRef::*;
        let shapes: &[&[OperatorRef]] = match self {
            DiagramClass::LowestOrder => &[&[Photon, Photon]],
            DiagramClass::SelfEnergyBound => &[&[Photon, SelfEnergy, Photon]],
            DiagramClass::Vertex => &[&[Vertex, Photon], &[Photon, Vertex]],
            DiagramClass::SelfEnergyFree => &[&[Photon, Photon, SelfEnergy], &[SelfEnergy, Photon, Photon]],
        };
        shapes
            .iter()
            .map(|ops| TermExpression::ladder(self.label(), ops).expect("static ladder shapes are valid"))
            .collect()
    }
}

impl std::fmt::Display for DiagramClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{build_spectrum, ContinuumGrid};

    fn coupling(dim: usize) -> EnergyDependentOperator {
        EnergyDependentOperator::from_fn(
            dim,
            move |w| OperatorMatrix::from_fn(dim, |i, j| num_complex::Complex64::new((1.0 + w).sin() * 0.1 * (i + j + 1) as f64, 0.0)),
            None,
            "A",
        )
    }

    #[test]
    fn interpolated_coupling_converges() {
        let exact = coupling(2).evaluate(0.737).unwrap();
        let coarse = PhotonGrid::uniform(0.0, 2.0, 41, coupling(2)).unwrap();
        let fine = PhotonGrid::uniform(0.0, 2.0, 81, coupling(2)).unwrap();
        let ec = coarse.coupling_at(0.737).unwrap().max_abs_diff(&exact);
        let ef = fine.coupling_at(0.737).unwrap().max_abs_diff(&exact);
        assert!(ef < 1e-8 && ef < ec / 8.0, "{ec:e} {ef:e}");
        assert!(matches!(coarse.coupling_at(2.5), Err(Error::PoleOutsideGrid { .. })));
    }

    #[test]
    fn model_validation() {
        let s = build_spectrum(&[-0.5], Some(&ContinuumGrid::uniform(0.0, 2.0, 3))).unwrap();
        let photons = PhotonGrid::uniform(0.0, 3.0, 7, coupling(4)).unwrap();
        let zero = EnergyDependentOperator::zero(4, "0");
        let ok = RadRecModel::new(RadRecParts::new(s.clone(), photons.clone(), zero.clone(), zero.clone(), 0, 2));
        let m = ok.unwrap();
        assert_eq!(m.omega_star(), 1.5);
        assert_eq!(m.targets(), vec![0]);
        assert_eq!(m.model_space().indices().collect::<Vec<_>>(), vec![2]);

        let bad = RadRecModel::new(RadRecParts::new(s.clone(), photons.clone(), zero.clone(), zero.clone(), 1, 0));
        assert!(matches!(bad, Err(Error::InvalidModel(_))));
        let s2 = build_spectrum(&[-0.5, 1.0, 0.5], None).unwrap();
        let photons3 = PhotonGrid::uniform(0.0, 3.0, 7, coupling(3)).unwrap();
        let z3 = EnergyDependentOperator::zero(3, "0");
        let err = RadRecModel::new(RadRecParts::new(s2, photons3, z3.clone(), z3, 2, 0)).unwrap_err();
        assert!(err.to_string().contains("emission kinematics"));
    }

    #[test]
    fn class_terms() {
        assert_eq!(DiagramClass::Vertex.terms().len(), 2);
        assert_eq!(DiagramClass::SelfEnergyBound.terms()[0].to_string(), "A Γ(𝓔−ω) Σ(𝓔−ω) Γ(𝓔−ω) A");
    }
}
