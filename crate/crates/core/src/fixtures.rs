//! Reusable desk-scale models for tests, the CLI `verify` suites and
//! benchmarks.
//!
//! All operators are Hermitian. The photon coupling factorizes as
//! `A(ω) = g(ω) A₀`, so `∂A/∂ω` is proportional to `A` and the
//! derivative terms of the bound self-energy stay real.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

use crate::error::Result;
use crate::greens::{GreensRecursion, UEvaluator};
use crate::operator::{EnergyDependentOperator, MatrixFn, Profile};
use crate::radrec::{PhotonGrid, RadRecModel, RadRecParts};
use crate::spectral::{build_spectrum, BasisState, ContinuumGrid, ModelSpace, OperatorMatrix, Spectrum, StateKind};

fn smooth_kernel(energies: &[f64], f: impl Fn(f64, f64) -> Complex64) -> OperatorMatrix {
    OperatorMatrix::from_fn(energies.len(), |i, j| f(energies[i], energies[j]))
}

/// `⟨x|A₀|y⟩` for states at energies `x`, `y`: smooth, Hermitian, complex.
pub fn photon_element(x: f64, y: f64) -> Complex64 {
    let d = x - y;
    let g = (-0.5 * d * d).exp();
    Complex64::new(0.3 * g * (1.0 + 0.2 * x * y), 0.05 * d * g)
}

/// `g(ω)` in `A(ω) = g(ω) A₀`.
pub fn photon_profile(omega: f64) -> f64 {
    1.0 / (1.0 + 0.3 * omega)
}

pub fn photon_profile_derivative(omega: f64) -> f64 {
    -0.3 / ((1.0 + 0.3 * omega) * (1.0 + 0.3 * omega))
}

/// `⟨x|Σ(e)|y⟩ = ⟨x|S₀|y⟩ + e ⟨x|S₁|y⟩`.
pub fn self_energy_element(e: f64, x: f64, y: f64) -> Complex64 {
    let d = x - y;
    let s0 = Complex64::new(0.05 * (x + y).cos() * (-0.5 * d * d).exp(), 0.01 * d.sin());
    let s1 = 0.02 * (-d * d).exp();
    s0 + e * s1
}

pub fn vertex_element(x: f64, y: f64) -> Complex64 {
    let d = x - y;
    Complex64::new(0.04 * (1.0 + x + y).sin() * (-d * d).exp(), 0.0)
}

pub fn photon_kernel(energies: &[f64]) -> OperatorMatrix {
    smooth_kernel(energies, photon_element)
}

/// `A(ω) = g(ω) A₀` with its analytic derivative.
pub fn photon_coupling(energies: &[f64]) -> EnergyDependentOperator {
    let a0 = Arc::new(photon_kernel(energies));
    let a0_d = a0.clone();
    let derivative: MatrixFn = Arc::new(move |w: f64| a0_d.scale_real(photon_profile_derivative(w)));
    EnergyDependentOperator::from_fn(
        energies.len(),
        move |w| a0.scale_real(photon_profile(w)),
        Some(derivative),
        "A(ω)",
    )
}

/// Linear-in-energy Hermitian self-energy `Σ(E) = S₀ + E S₁`.
pub fn self_energy(energies: &[f64]) -> EnergyDependentOperator {
    let s0 = smooth_kernel(energies, |x, y| self_energy_element(0.0, x, y));
    let s1 = smooth_kernel(energies, |x, y| self_energy_element(1.0, x, y) - self_energy_element(0.0, x, y));
    EnergyDependentOperator::linear(s0, s1, "Σ(E)").expect("matching dimensions")
}

pub fn vertex(energies: &[f64]) -> EnergyDependentOperator {
    EnergyDependentOperator::constant(smooth_kernel(energies, vertex_element), "Λ")
}

/// Capture into `a` (ε = −0.5) from the continuum sample at ε_p = 1 on a
/// trapezoid continuum `[0, 2]` with `n_continuum` points (odd), a second
/// bound level at −0.2, photon modes on `[0, 3]`.
pub fn continuum_model(n_continuum: usize, n_photons: usize) -> Result<RadRecModel> {
    let spectrum = build_spectrum(&[-0.5, -0.2], Some(&ContinuumGrid::uniform(0.0, 2.0, n_continuum)))?;
    let energies = spectrum.energies();
    let p = 2 + n_continuum / 2;
    let photons = PhotonGrid::uniform(0.0, 3.0, n_photons, photon_coupling(&energies))?;
    RadRecModel::new(RadRecParts::new(
        spectrum,
        photons,
        self_energy(&energies),
        vertex(&energies),
        0,
        p,
    ))
}

/// The default continuum fixture: 41 continuum samples, 61 photon modes.
pub fn reference_model() -> RadRecModel {
    continuum_model(41, 61).expect("reference fixture is valid")
}

/// Four bound levels `a, n, m, p` at −0.5, −0.125, 0.3, 1.0 (no continuum).
pub fn four_level_model() -> RadRecModel {
    let spectrum = build_spectrum(&[-0.5, -0.125, 0.3, 1.0], None).expect("valid levels");
    let energies = spectrum.energies();
    let photons = PhotonGrid::uniform(0.0, 3.0, 61, photon_coupling(&energies)).expect("valid grid");
    RadRecModel::new(RadRecParts::new(
        spectrum,
        photons,
        self_energy(&energies),
        vertex(&energies),
        0,
        3,
    ))
    .expect("valid fixture")
}

/// Two degenerate capture targets at −0.5 plus an explicit continuum sample
/// layout; `couplings` are `⟨q|A|p⟩` for the two targets.
pub fn two_target_model(couplings: [f64; 2]) -> RadRecModel {
    let states = vec![
        bound(0, -0.5),
        bound(1, -0.5),
        bound(2, -0.1),
        bound(3, 1.0),
    ];
    let spectrum = Spectrum::from_states(states, None).expect("valid states");
    let [c0, c1] = couplings;
    let a = OperatorMatrix::from_real_rows(&[
        vec![0.0, 0.0, 0.1, c0],
        vec![0.0, 0.0, 0.05, c1],
        vec![0.1, 0.05, 0.0, 0.2],
        vec![c0, c1, 0.2, 0.0],
    ])
    .expect("square");
    let photons = PhotonGrid::uniform(0.0, 3.0, 31, EnergyDependentOperator::constant(a, "A")).expect("valid grid");
    let zero = EnergyDependentOperator::zero(4, "0");
    RadRecModel::new(RadRecParts::new(spectrum, photons, zero.clone(), zero, 0, 3)).expect("valid fixture")
}

fn bound(id: usize, energy: f64) -> BasisState {
    BasisState {
        id,
        energy,
        kind: StateKind::Bound,
        weight: None,
        label: format!("bound[{id}]"),
    }
}

/// Random Hermitian matrix with entries of magnitude up to `scale`.
pub fn random_hermitian(rng: &mut impl Rng, dim: usize, scale: f64) -> OperatorMatrix {
    let mut m = OperatorMatrix::from_fn(dim, |_, _| {
        Complex64::new(rng.random_range(-scale..scale), rng.random_range(-scale..scale))
    });
    m = (&m + &m.adjoint()).scale_real(0.5);
    m
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Scalar model for the counterterm mechanism: initial state `i` at `E`,
/// a second model-space state `m` at `E − d`, and a final state `f` in Q.
/// Only `V_mi` and `V_fm` are nonzero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountertermToy {
    pub energy: f64,
    pub gap: f64,
    pub eps_f: f64,
    pub v_mi: f64,
    pub v_fm: f64,
}

impl Default for CountertermToy {
    fn default() -> Self {
        CountertermToy {
            energy: 0.0,
            gap: 1e-2,
            eps_f: 1.0,
            v_mi: 0.3,
            v_fm: 0.4,
        }
    }
}

impl CountertermToy {
    pub const I: usize = 0;
    pub const M: usize = 1;
    pub const F: usize = 2;

    pub fn with_gap(self, gap: f64) -> Self {
        CountertermToy { gap, ..self }
    }

    pub fn spectrum(&self) -> Spectrum {
        build_spectrum(&[self.energy, self.energy - self.gap, self.eps_f], None).expect("finite levels")
    }

    pub fn model(&self) -> ModelSpace {
        ModelSpace::with_default_tol([Self::I, Self::M])
    }

    pub fn interaction(&self) -> OperatorMatrix {
        let mut rows = vec![vec![0.0; 3]; 3];
        rows[Self::M][Self::I] = self.v_mi;
        rows[Self::F][Self::M] = self.v_fm;
        OperatorMatrix::from_real_rows(&rows).expect("square")
    }

    pub fn evaluators(&self) -> Vec<UEvaluator> {
        let v = EnergyDependentOperator::constant(self.interaction(), "V");
        let (s, m) = (self.spectrum(), self.model());
        (1..=2).map(|k| UEvaluator::ladder(&s, &m, &v, k)).collect()
    }

    fn e_primes(&self) -> Vec<f64> {
        vec![self.energy, self.energy - self.gap]
    }

    /// `G^(2)(E)` with counterterms.
    pub fn g2(&self) -> Result<OperatorMatrix> {
        let (s, m, us, ep) = (self.spectrum(), self.model(), self.evaluators(), self.e_primes());
        GreensRecursion::new(&us, &s, &m, &ep).evaluate(2, self.energy)
    }

    /// `U^(2)(E)`: the diagnostic mode without counterterms.
    pub fn u2(&self) -> Result<OperatorMatrix> {
        self.evaluators()[1].evaluate(self.energy)
    }

    /// The counterterm sum subtracted from `U^(2)`.
    pub fn counterterms(&self) -> Result<OperatorMatrix> {
        let (s, m, us, ep) = (self.spectrum(), self.model(), self.evaluators(), self.e_primes());
        GreensRecursion::new(&us, &s, &m, &ep).counterterm_sum(2, self.energy)
    }

    /// `U₂(𝓔) = |f⟩ V_fm/(𝓔 − ε_f) ⟨m|` as an energy-dependent operator.
    pub fn second_leg(&self) -> EnergyDependentOperator {
        let mut left = vec![Complex64::new(0.0, 0.0); 3];
        let mut right = left.clone();
        left[Self::F] = Complex64::new(self.v_fm, 0.0);
        right[Self::M] = Complex64::new(1.0, 0.0);
        EnergyDependentOperator::rank1(left, right, Profile::Pole { strength: 1.0, position: self.eps_f }, "U2")
            .expect("matching lengths")
    }

    /// `W₁ = V_mi |m⟩⟨i|`.
    pub fn first_leg(&self) -> OperatorMatrix {
        let mut rows = vec![vec![0.0; 3]; 3];
        rows[Self::M][Self::I] = self.v_mi;
        OperatorMatrix::from_real_rows(&rows).expect("square")
    }

    /// Projector onto `m`.
    pub fn p_prime(&self) -> OperatorMatrix {
        OperatorMatrix::diagonal_real(&[0.0, 1.0, 0.0])
    }
}
