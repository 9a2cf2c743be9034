//! Finite single-particle basis, the diagonal model Hamiltonian, model-space
//! projectors and the dense complex operator type everything else is built on.
//!
//! Continuum states are carried as quadrature samples: each sample stores the
//! weight of its node so that sums over intermediate continuum states can be
//! turned into integrals. Bound states carry no weight.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;

pub type CMatrix = DMatrix<Complex64>;

/// Default relative tolerance for treating two energies as degenerate.
pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-9;

/// `|e1 - e2| <= tol * max(1, |e1|)`.
pub fn is_degenerate(e1: f64, e2: f64, tol: f64) -> bool {
    (e1 - e2).abs() <= tol * e1.abs().max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StateKind {
    Bound,
    ContinuumSample,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisState {
    pub id: usize,
    pub energy: f64,
    pub kind: StateKind,
    /// Quadrature weight; present exactly for continuum samples.
    pub weight: Option<f64>,
    pub label: String,
}

impl BasisState {
    pub fn is_bound(&self) -> bool {
        self.kind == StateKind::Bound
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadratureRule {
    #[default]
    Trapezoid,
    GaussLegendre,
}

/// How the continuum part of the spectrum is discretized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ContinuumGrid {
    /// `n_points` nodes on `[min, max]`. Trapezoid nodes include both ends.
    Uniform {
        min: f64,
        max: f64,
        n_points: usize,
        rule: QuadratureRule,
    },
    /// Explicit increasing nodes with trapezoid weights; the interval is
    /// `[first, last]`.
    Explicit { nodes: Vec<f64> },
}

impl ContinuumGrid {
    pub fn uniform(min: f64, max: f64, n_points: usize) -> Self {
        ContinuumGrid::Uniform {
            min,
            max,
            n_points,
            rule: QuadratureRule::Trapezoid,
        }
    }

    /// Nodes, weights and integration interval.
    pub fn discretize(&self) -> Result<(Vec<f64>, Vec<f64>, (f64, f64))> {
        match self {
            ContinuumGrid::Uniform {
                min,
                max,
                n_points,
                rule,
            } => {
                if !min.is_finite() || !max.is_finite() {
                    return Err(Error::InvalidModel("continuum bounds must be finite".into()));
                }
                if *n_points < 2 {
                    return Err(Error::InvalidModel(format!(
                        "continuum needs at least 2 points, got {n_points}"
                    )));
                }
                if min >= max {
                    return Err(Error::InvalidModel(format!(
                        "non-monotone continuum grid: min {min} >= max {max}"
                    )));
                }
                let (nodes, weights) = match rule {
                    QuadratureRule::Trapezoid => {
                        let nodes = quad::linspace(*min, *max, *n_points);
                        let weights = quad::trapezoid_weights(&nodes);
                        (nodes, weights)
                    }
                    QuadratureRule::GaussLegendre => quad::gauss_legendre(*min, *max, *n_points),
                };
                Ok((nodes, weights, (*min, *max)))
            }
            ContinuumGrid::Explicit { nodes } => {
                if nodes.len() < 2 {
                    return Err(Error::InvalidModel(format!(
                        "continuum needs at least 2 points, got {}",
                        nodes.len()
                    )));
                }
                if nodes.iter().any(|x| !x.is_finite()) {
                    return Err(Error::InvalidModel("continuum nodes must be finite".into()));
                }
                if nodes.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::InvalidModel(
                        "non-monotone continuum grid: nodes must be strictly increasing".into(),
                    ));
                }
                let weights = quad::trapezoid_weights(nodes);
                Ok((nodes.clone(), weights, (nodes[0], nodes[nodes.len() - 1])))
            }
        }
    }
}

/// Diagonal model Hamiltonian: bound levels followed by continuum samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    states: Vec<BasisState>,
    continuum: Option<(f64, f64)>,
}

/// Builds the spectrum with bound states first and continuum samples after.
pub fn build_spectrum(bound_energies: &[f64], continuum: Option<&ContinuumGrid>) -> Result<Spectrum> {
    if bound_energies.is_empty() && continuum.is_none() {
        return Err(Error::InvalidModel("spectrum needs at least one state".into()));
    }
    let mut states = Vec::new();
    for (i, &e) in bound_energies.iter().enumerate() {
        if !e.is_finite() {
            return Err(Error::InvalidModel(format!("bound energy {i} is not finite")));
        }
        states.push(BasisState {
            id: states.len(),
            energy: e,
            kind: StateKind::Bound,
            weight: None,
            label: format!("bound[{i}]"),
        });
    }
    let mut interval = None;
    if let Some(grid) = continuum {
        let (nodes, weights, range) = grid.discretize()?;
        for (i, (x, w)) in nodes.into_iter().zip(weights).enumerate() {
            states.push(BasisState {
                id: states.len(),
                energy: x,
                kind: StateKind::ContinuumSample,
                weight: Some(w),
                label: format!("continuum[{i}]"),
            });
        }
        interval = Some(range);
    }
    Spectrum::from_states(states, interval)
}

impl Spectrum {
    /// Validates the state list; ids must already be `0..len`.
    pub fn from_states(states: Vec<BasisState>, continuum: Option<(f64, f64)>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidModel("spectrum needs at least one state".into()));
        }
        for (i, s) in states.iter().enumerate() {
            if s.id != i {
                return Err(Error::InvalidModel(format!("state ids must be contiguous: position {i} has id {}", s.id)));
            }
            if !s.energy.is_finite() {
                return Err(Error::InvalidModel(format!("state {i} has non-finite energy")));
            }
            match (s.kind, s.weight) {
                (StateKind::Bound, None) => {}
                (StateKind::Bound, Some(_)) => {
                    return Err(Error::InvalidModel(format!("bound state {i} must not carry a weight")))
                }
                (StateKind::ContinuumSample, Some(w)) if w > 0.0 && w.is_finite() => {}
                (StateKind::ContinuumSample, _) => {
                    return Err(Error::InvalidModel(format!(
                        "continuum sample {i} needs a positive weight"
                    )))
                }
            }
        }
        let has_continuum = states.iter().any(|s| !s.is_bound());
        if has_continuum != continuum.is_some() {
            return Err(Error::InvalidModel(
                "continuum interval must be given exactly when continuum samples exist".into(),
            ));
        }
        Ok(Spectrum { states, continuum })
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[BasisState] {
        &self.states
    }

    pub fn state(&self, id: usize) -> Result<&BasisState> {
        self.states.get(id).ok_or(Error::IndexError {
            index: id,
            dim: self.dim(),
        })
    }

    pub fn energy(&self, id: usize) -> Result<f64> {
        Ok(self.state(id)?.energy)
    }

    pub fn energies(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.energy).collect()
    }

    pub fn weights(&self) -> Vec<Option<f64>> {
        self.states.iter().map(|s| s.weight).collect()
    }

    pub fn bound_indices(&self) -> Vec<usize> {
        self.states.iter().filter(|s| s.is_bound()).map(|s| s.id).collect()
    }

    pub fn continuum_indices(&self) -> Vec<usize> {
        self.states.iter().filter(|s| !s.is_bound()).map(|s| s.id).collect()
    }

    /// Integration interval of the continuum, if any.
    pub fn continuum_interval(&self) -> Option<(f64, f64)> {
        self.continuum
    }

    /// Measure used when summing over a complete set of states: 1 for bound
    /// states, the quadrature weight for continuum samples.
    pub fn completeness_weights(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.weight.unwrap_or(1.0)).collect()
    }

    /// H0 as a diagonal matrix.
    pub fn hamiltonian(&self) -> OperatorMatrix {
        OperatorMatrix::diagonal_real(&self.energies())
    }

    /// Ids of states degenerate with `energy`.
    pub fn degenerate_with(&self, energy: f64, tol: f64) -> Vec<usize> {
        self.states
            .iter()
            .filter(|s| is_degenerate(energy, s.energy, tol))
            .map(|s| s.id)
            .collect()
    }

    /// Largest gap between consecutive distinct energies (0 for a single level).
    pub fn max_gap(&self) -> f64 {
        let mut e = self.energies();
        e.sort_by(f64::total_cmp);
        e.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }
}

/// Model space P as a set of basis ids; Q is the complement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpace {
    p_indices: BTreeSet<usize>,
    degeneracy_tol: f64,
}

impl ModelSpace {
    pub fn new(indices: impl IntoIterator<Item = usize>, degeneracy_tol: f64) -> Result<Self> {
        if !(degeneracy_tol > 0.0) || !degeneracy_tol.is_finite() {
            return Err(Error::InvalidModel(format!(
                "degeneracy tolerance must be positive, got {degeneracy_tol}"
            )));
        }
        Ok(ModelSpace {
            p_indices: indices.into_iter().collect(),
            degeneracy_tol,
        })
    }

    pub fn with_default_tol(indices: impl IntoIterator<Item = usize>) -> Self {
        ModelSpace {
            p_indices: indices.into_iter().collect(),
            degeneracy_tol: DEFAULT_DEGENERACY_TOL,
        }
    }

    pub fn empty() -> Self {
        Self::with_default_tol([])
    }

    /// All states degenerate with `energy`.
    pub fn degenerate_with(spectrum: &Spectrum, energy: f64, tol: f64) -> Result<Self> {
        Self::new(spectrum.degenerate_with(energy, tol), tol)
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.p_indices.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.p_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p_indices.is_empty()
    }

    pub fn contains(&self, id: usize) -> bool {
        self.p_indices.contains(&id)
    }

    pub fn degeneracy_tol(&self) -> f64 {
        self.degeneracy_tol
    }

    pub fn validate(&self, spectrum: &Spectrum) -> Result<()> {
        match self.p_indices.iter().find(|&&i| i >= spectrum.dim()) {
            Some(&bad) => Err(Error::InvalidModel(format!(
                "model-space index {bad} out of range for dimension {}",
                spectrum.dim()
            ))),
            None => Ok(()),
        }
    }

    /// The part of P whose states are degenerate with `energy` (the block
    /// `P_E` acted on by an evolution operator at energy `E`).
    pub fn block_at(&self, spectrum: &Spectrum, energy: f64) -> Result<ModelSpace> {
        self.validate(spectrum)?;
        let states = spectrum.states();
        Ok(ModelSpace {
            p_indices: self
                .p_indices
                .iter()
                .copied()
                .filter(|&i| is_degenerate(energy, states[i].energy, self.degeneracy_tol))
                .collect(),
            degeneracy_tol: self.degeneracy_tol,
        })
    }

    /// Distinct energies of the model space, in increasing order.
    pub fn distinct_energies(&self, spectrum: &Spectrum) -> Result<Vec<f64>> {
        self.validate(spectrum)?;
        let mut out: Vec<f64> = Vec::new();
        let mut e: Vec<f64> = self.indices().map(|i| spectrum.states()[i].energy).collect();
        e.sort_by(f64::total_cmp);
        for x in e {
            if out.last().is_none_or(|&last| !is_degenerate(last, x, self.degeneracy_tol)) {
                out.push(x);
            }
        }
        Ok(out)
    }
}

/// Realizes `(P, Q)` as diagonal 0/1 matrices.
pub fn projectors(spectrum: &Spectrum, model: &ModelSpace) -> Result<(OperatorMatrix, OperatorMatrix)> {
    model.validate(spectrum)?;
    let n = spectrum.dim();
    let p: Vec<f64> = (0..n).map(|i| if model.contains(i) { 1.0 } else { 0.0 }).collect();
    let q: Vec<f64> = p.iter().map(|x| 1.0 - x).collect();
    Ok((OperatorMatrix::diagonal_real(&p), OperatorMatrix::diagonal_real(&q)))
}

/// `entries[bra][ket]`.
pub fn matrix_element(op: &OperatorMatrix, bra: usize, ket: usize) -> Result<Complex64> {
    op.element(bra, ket)
}

/// Dense square complex matrix with an optional hermiticity flag.
#[derive(Clone)]
pub struct OperatorMatrix {
    entries: CMatrix,
    hermitian_hint: bool,
}

/// Equality is entrywise; the hermiticity flag is metadata.
impl PartialEq for OperatorMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

impl fmt::Debug for OperatorMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OperatorMatrix")
            .field("dim", &self.dim())
            .field("hermitian_hint", &self.hermitian_hint)
            .field("entries", &self.entries)
            .finish()
    }
}

/// Relative hermiticity tolerance checked when `hermitian_hint` is set.
pub const HERMITICITY_TOL: f64 = 1e-12;

impl OperatorMatrix {
    pub fn new(entries: CMatrix) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::InvalidInput(format!(
                "operator must be square, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        Ok(OperatorMatrix {
            entries,
            hermitian_hint: false,
        })
    }

    /// Builds an operator flagged Hermitian after checking the flag holds.
    pub fn hermitian(entries: CMatrix) -> Result<Self> {
        let op = Self::new(entries)?;
        let dev = op.hermiticity_deviation();
        if dev > HERMITICITY_TOL * op.max_abs() {
            return Err(Error::InvalidInput(format!(
                "matrix flagged Hermitian deviates by {dev:e}"
            )));
        }
        Ok(OperatorMatrix {
            hermitian_hint: true,
            ..op
        })
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput("matrix rows must all have length equal to the row count".into()));
        }
        Self::new(CMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        OperatorMatrix {
            entries: CMatrix::from_fn(n, n, f),
            hermitian_hint: false,
        }
    }

    pub fn zeros(n: usize) -> Self {
        OperatorMatrix {
            entries: CMatrix::zeros(n, n),
            hermitian_hint: true,
        }
    }

    pub fn identity(n: usize) -> Self {
        OperatorMatrix {
            entries: CMatrix::identity(n, n),
            hermitian_hint: true,
        }
    }

    pub fn diagonal(values: &[Complex64]) -> Self {
        let hermitian = values.iter().all(|v| v.im == 0.0);
        OperatorMatrix {
            entries: CMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(values)),
            hermitian_hint: hermitian,
        }
    }

    pub fn diagonal_real(values: &[f64]) -> Self {
        let v: Vec<Complex64> = values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::diagonal(&v)
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    pub fn hermitian_hint(&self) -> bool {
        self.hermitian_hint
    }

    pub fn element(&self, bra: usize, ket: usize) -> Result<Complex64> {
        let dim = self.dim();
        if bra >= dim {
            return Err(Error::IndexError { index: bra, dim });
        }
        if ket >= dim {
            return Err(Error::IndexError { index: ket, dim });
        }
        Ok(self.entries[(bra, ket)])
    }

    pub fn adjoint(&self) -> Self {
        OperatorMatrix {
            entries: self.entries.adjoint(),
            hermitian_hint: self.hermitian_hint,
        }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        OperatorMatrix {
            entries: &self.entries * factor,
            hermitian_hint: self.hermitian_hint && factor.im == 0.0,
        }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(Complex64::new(factor, 0.0))
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        let adj = self.entries.adjoint();
        (&self.entries - adj).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &OperatorMatrix) -> f64 {
        (&self.entries - &other.entries).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|z| *z == Complex64::new(0.0, 0.0))
    }

    /// First non-finite entry, row-major.
    pub fn first_non_finite(&self) -> Option<(usize, usize)> {
        let n = self.dim();
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .find(|&(i, j)| {
                let z = self.entries[(i, j)];
                !(z.re.is_finite() && z.im.is_finite())
            })
    }

    fn check_dims(&self, other: &OperatorMatrix) {
        assert_eq!(
            self.dim(),
            other.dim(),
            "operator dimension mismatch: {} vs {}",
            self.dim(),
            other.dim()
        );
    }
}

impl Mul for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        self.check_dims(rhs);
        OperatorMatrix {
            entries: &self.entries * &rhs.entries,
            hermitian_hint: false,
        }
    }
}

impl Add for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        self.check_dims(rhs);
        OperatorMatrix {
            entries: &self.entries + &rhs.entries,
            hermitian_hint: self.hermitian_hint && rhs.hermitian_hint,
        }
    }
}

impl Sub for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        self.check_dims(rhs);
        OperatorMatrix {
            entries: &self.entries - &rhs.entries,
            hermitian_hint: self.hermitian_hint && rhs.hermitian_hint,
        }
    }
}

impl Neg for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn neg(self) -> OperatorMatrix {
        OperatorMatrix {
            entries: -&self.entries,
            hermitian_hint: self.hermitian_hint,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn trapezoid_spectrum_with_bound_state() {
        let s = build_spectrum(&[-0.5], Some(&ContinuumGrid::uniform(0.0, 1.0, 3))).unwrap();
        assert_eq!(s.dim(), 4);
        assert!(s.states()[0].is_bound());
        assert_eq!(s.states()[0].weight, None);
        let w: Vec<f64> = s.states()[1..].iter().map(|st| st.weight.unwrap()).collect();
        assert_eq!(w, vec![0.25, 0.5, 0.25]);
        assert_eq!(s.continuum_interval(), Some((0.0, 1.0)));
    }

    #[test]
    fn two_point_continuum_only() {
        let s = build_spectrum(&[], Some(&ContinuumGrid::uniform(0.0, 2.0, 2))).unwrap();
        assert_eq!(s.dim(), 2);
        assert_eq!(s.weights(), vec![Some(1.0), Some(1.0)]);
    }

    #[test]
    fn bound_only_spectrum() {
        let s = build_spectrum(&[-0.5, -0.125], None).unwrap();
        assert_eq!(s.dim(), 2);
        assert!(s.states().iter().all(|st| st.weight.is_none()));
        assert!(s.continuum_indices().is_empty());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(build_spectrum(&[], None), Err(Error::InvalidModel(_))));
        assert!(matches!(
            build_spectrum(&[], Some(&ContinuumGrid::uniform(1.0, 0.0, 5))),
            Err(Error::InvalidModel(_))
        ));
        assert!(matches!(
            build_spectrum(&[], Some(&ContinuumGrid::uniform(0.0, 1.0, 1))),
            Err(Error::InvalidModel(_))
        ));
        assert!(matches!(
            build_spectrum(&[], Some(&ContinuumGrid::Explicit { nodes: vec![0.0, 0.5, 0.4] })),
            Err(Error::InvalidModel(_))
        ));
        assert!(matches!(build_spectrum(&[f64::NAN], None), Err(Error::InvalidModel(_))));
    }

    #[test]
    fn weights_sum_to_interval_length() {
        for rule in [QuadratureRule::Trapezoid, QuadratureRule::GaussLegendre] {
            for n in [2, 3, 7, 40, 201] {
                let grid = ContinuumGrid::Uniform {
                    min: -0.3,
                    max: 2.9,
                    n_points: n,
                    rule,
                };
                let s = build_spectrum(&[], Some(&grid)).unwrap();
                let total: f64 = s.weights().into_iter().flatten().sum();
                assert!((total - 3.2).abs() < 1e-12, "{rule:?} n={n}: {total}");
            }
        }
    }

    #[test]
    fn projector_examples() {
        let s = build_spectrum(&[1.0, 2.0, 3.0], None).unwrap();
        let (p, q) = projectors(&s, &ModelSpace::with_default_tol([0])).unwrap();
        assert_eq!(p, OperatorMatrix::diagonal_real(&[1.0, 0.0, 0.0]));
        assert_eq!(q, OperatorMatrix::diagonal_real(&[0.0, 1.0, 1.0]));

        let s2 = build_spectrum(&[1.0, 2.0], None).unwrap();
        let (_, q) = projectors(&s2, &ModelSpace::with_default_tol([0, 1])).unwrap();
        assert!(q.is_zero());
        let (p, _) = projectors(&s2, &ModelSpace::empty()).unwrap();
        assert!(p.is_zero());

        assert!(matches!(
            projectors(&s2, &ModelSpace::with_default_tol([2])),
            Err(Error::InvalidModel(_))
        ));
    }

    #[test]
    fn matrix_element_access() {
        let id = OperatorMatrix::identity(2);
        assert_eq!(matrix_element(&id, 0, 0).unwrap(), c(1.0, 0.0));
        assert_eq!(matrix_element(&id, 0, 1).unwrap(), c(0.0, 0.0));
        let m = OperatorMatrix::from_rows(&[vec![c(0.0, 0.0), c(0.0, 0.0)], vec![c(2.0, -1.0), c(0.0, 0.0)]]).unwrap();
        assert_eq!(matrix_element(&m, 1, 0).unwrap(), c(2.0, -1.0));
        assert_eq!(matrix_element(&m, 2, 0), Err(Error::IndexError { index: 2, dim: 2 }));
    }

    #[test]
    fn hermitian_hint_is_checked() {
        let ok = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 2.0), c(0.0, -2.0), c(3.0, 0.0)]);
        assert!(OperatorMatrix::hermitian(ok).unwrap().hermitian_hint());
        let bad = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 2.0), c(0.0, 2.0), c(3.0, 0.0)]);
        assert!(OperatorMatrix::hermitian(bad).is_err());
    }

    #[test]
    fn block_at_selects_degenerate_model_states() {
        let s = build_spectrum(&[-1.0, -1.0 + 1e-12, -0.5], None).unwrap();
        let m = ModelSpace::with_default_tol([0, 1, 2]);
        let block: Vec<usize> = m.block_at(&s, -1.0).unwrap().indices().collect();
        assert_eq!(block, vec![0, 1]);
        assert_eq!(m.distinct_energies(&s).unwrap().len(), 2);
    }
}
