//! Ladder evolution operators and the counterterm recursion that turns them
//! into Green's operators.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result, ResultExt};
use crate::operator::EnergyDependentOperator;
use crate::singularity::{reduced_resolvent, resolvent_with_tol};
use crate::spectral::{is_degenerate, projectors, ModelSpace, OperatorMatrix, Spectrum};

/// Resolvent used between the interactions of a ladder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LadderResolvent {
    Full { eta: f64 },
    ReducedQ,
}

/// `Γ V Γ V … Γ V` with `n` interactions, every factor at energy `e`.
pub fn evaluate_ladder(
    spectrum: &Spectrum,
    model: &ModelSpace,
    v: &EnergyDependentOperator,
    e: f64,
    n: usize,
    kind: LadderResolvent,
) -> Result<OperatorMatrix> {
    if n == 0 {
        return Err(Error::InvalidParameter("ladder order must be at least 1".into()));
    }
    if v.dim() != spectrum.dim() {
        return Err(Error::InvalidInput(format!(
            "interaction `{}` has dimension {} but the spectrum has {}",
            v.tag(),
            v.dim(),
            spectrum.dim()
        )));
    }
    let gamma = match kind {
        LadderResolvent::Full { eta } => resolvent_with_tol(spectrum, e, eta, model.degeneracy_tol()),
        LadderResolvent::ReducedQ => reduced_resolvent(spectrum, model, e),
    }
    .context(|| "ladder position 1".to_string())?;
    let step = &gamma * &v.evaluate(e)?;
    let mut out = step.clone();
    for _ in 1..n {
        out = &out * &step;
    }
    Ok(out)
}

pub type UFn = Arc<dyn Fn(f64) -> Result<OperatorMatrix> + Send + Sync>;

/// `U^(n)(E)` as a function of the energy.
#[derive(Clone)]
pub struct UEvaluator {
    order: usize,
    eval: UFn,
}

impl std::fmt::Debug for UEvaluator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "UEvaluator(order {})", self.order)
    }
}

impl UEvaluator {
    pub fn new(order: usize, eval: impl Fn(f64) -> Result<OperatorMatrix> + Send + Sync + 'static) -> Self {
        UEvaluator {
            order,
            eval: Arc::new(eval),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(0, move |_| Ok(OperatorMatrix::identity(dim)))
    }

    /// Order-`n` ladder whose resolvents at energy `x` exclude only the model
    /// states degenerate with `x`; other model-space states stay in and give
    /// the quasi-singular denominators the counterterms remove.
    pub fn ladder(spectrum: &Spectrum, model: &ModelSpace, v: &EnergyDependentOperator, order: usize) -> Self {
        if order == 0 {
            return Self::identity(spectrum.dim());
        }
        let spectrum = spectrum.clone();
        let model = model.clone();
        let v = v.clone();
        Self::new(order, move |x| {
            let block = model.block_at(&spectrum, x)?;
            evaluate_ladder(&spectrum, &block, &v, x, order, LadderResolvent::ReducedQ)
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn evaluate(&self, e: f64) -> Result<OperatorMatrix> {
        (self.eval)(e)
    }
}

/// Green's-operator recursion
/// `G^(n)(E) = U^(n)(E) − Σ_k Σ_{E′} G^(n−k)(E′) P_{E′} U^(k)(E)`,
/// with lower orders cached per `(order, energy)` for one invocation.
pub struct GreensRecursion<'a> {
    us: &'a [UEvaluator],
    spectrum: &'a Spectrum,
    model: &'a ModelSpace,
    e_primes: &'a [f64],
    cache: HashMap<(usize, u64), OperatorMatrix>,
}

impl<'a> GreensRecursion<'a> {
    pub fn new(us: &'a [UEvaluator], spectrum: &'a Spectrum, model: &'a ModelSpace, e_primes: &'a [f64]) -> Self {
        GreensRecursion {
            us,
            spectrum,
            model,
            e_primes,
            cache: HashMap::new(),
        }
    }

    fn u(&self, k: usize) -> Result<&UEvaluator> {
        self.us
            .iter()
            .find(|u| u.order() == k)
            .ok_or_else(|| Error::InvalidInput(format!("no evolution operator supplied for order {k}")))
    }

    /// `G^(n)(e)`.
    pub fn evaluate(&mut self, n: usize, e: f64) -> Result<OperatorMatrix> {
        if n == 0 {
            return Err(Error::InvalidParameter("Green's-operator order must be at least 1".into()));
        }
        if let Some(g) = self.cache.get(&(n, e.to_bits())) {
            return Ok(g.clone());
        }
        let u = self.u(n)?.evaluate(e)?;
        let g = if n == 1 { u } else { &u - &self.counterterm_sum(n, e)? };
        if let Some((row, col)) = g.first_non_finite() {
            return Err(Error::ResidualSingularity { order: n, row, col });
        }
        self.cache.insert((n, e.to_bits()), g.clone());
        Ok(g)
    }

    /// `Σ_{k=1}^{n−1} Σ_{E′ ≠ e} G^(n−k)(E′) P_{E′} U^(k)(e)`.
    pub fn counterterm_sum(&mut self, n: usize, e: f64) -> Result<OperatorMatrix> {
        let dim = self.spectrum.dim();
        let mut sum = OperatorMatrix::zeros(dim);
        let tol = self.model.degeneracy_tol();
        for k in 1..n {
            let uk = self.u(k)?.evaluate(e)?;
            for &ep in self.e_primes {
                if is_degenerate(e, ep, tol) {
                    continue;
                }
                let block = self.model.block_at(self.spectrum, ep)?;
                if block.is_empty() {
                    continue;
                }
                let (p_prime, _) = projectors(self.spectrum, &block)?;
                let lower = self.evaluate(n - k, ep)?;
                sum = &sum + &(&(&lower * &p_prime) * &uk);
            }
        }
        Ok(sum)
    }
}

/// `G^(n)(E)` from the supplied `U^(1..n)`.
pub fn greens_order_n(
    us: &[UEvaluator],
    n: usize,
    e: f64,
    spectrum: &Spectrum,
    model: &ModelSpace,
    e_primes: &[f64],
) -> Result<OperatorMatrix> {
    GreensRecursion::new(us, spectrum, model, e_primes).evaluate(n, e)
}
