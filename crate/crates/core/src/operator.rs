//! Matrix-valued functions of an energy parameter.
//!
//! Self-energy, vertex and photon couplings are all carried by
//! [`EnergyDependentOperator`]. Built-in forms have analytic derivatives;
//! anything else falls back on central differences with one Richardson step.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{CMatrix, OperatorMatrix};

/// Relative finite-difference step: `h = RELATIVE_FD_STEP * max(1, |E|)`.
pub const RELATIVE_FD_STEP: f64 = 1e-4;

pub type MatrixFn = Arc<dyn Fn(f64) -> OperatorMatrix + Send + Sync>;

/// Scalar energy profile of a separable operator.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    /// `c0 + c1 E + c2 E² + …`
    Polynomial(Vec<f64>),
    /// `strength / (E - position)`
    Pole { strength: f64, position: f64 },
}

impl Profile {
    pub fn value(&self, e: f64) -> f64 {
        match self {
            Profile::Polynomial(c) => c.iter().rev().fold(0.0, |acc, &ck| acc * e + ck),
            Profile::Pole { strength, position } => strength / (e - position),
        }
    }

    pub fn derivative(&self, e: f64) -> f64 {
        match self {
            Profile::Polynomial(c) => c
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (k, &ck)| acc * e + k as f64 * ck),
            Profile::Pole { strength, position } => -strength / ((e - position) * (e - position)),
        }
    }
}

#[derive(Clone)]
pub enum OperatorForm {
    Zero { dim: usize },
    Constant(OperatorMatrix),
    /// `M(E) = at_zero + E * slope`
    Linear {
        at_zero: OperatorMatrix,
        slope: OperatorMatrix,
    },
    /// `M(E) = profile(E) |left><right|`
    SeparableRank1 {
        left: Vec<Complex64>,
        right: Vec<Complex64>,
        profile: Profile,
    },
    Function {
        dim: usize,
        eval: MatrixFn,
        derivative: Option<MatrixFn>,
    },
}

impl fmt::Debug for OperatorForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OperatorForm::Zero { dim } => write!(f, "Zero({dim})"),
            OperatorForm::Constant(m) => write!(f, "Constant({}x{})", m.dim(), m.dim()),
            OperatorForm::Linear { at_zero, .. } => write!(f, "Linear({}x{})", at_zero.dim(), at_zero.dim()),
            OperatorForm::SeparableRank1 { left, profile, .. } => {
                write!(f, "SeparableRank1({}, {profile:?})", left.len())
            }
            OperatorForm::Function { dim, derivative, .. } => {
                write!(f, "Function({dim}, analytic derivative: {})", derivative.is_some())
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct EnergyDependentOperator {
    form: OperatorForm,
    derivative_override: Option<Box<EnergyDependentOperator>>,
    domain: Option<(f64, f64)>,
    tag: String,
}

/// Outcome of comparing an analytic derivative with finite differences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeCheck {
    pub energy: f64,
    pub deviation: f64,
    pub tolerance: f64,
}

impl EnergyDependentOperator {
    pub fn new(form: OperatorForm, tag: impl Into<String>) -> Result<Self> {
        let op = EnergyDependentOperator {
            form,
            derivative_override: None,
            domain: None,
            tag: tag.into(),
        };
        op.validate_form()?;
        Ok(op)
    }

    pub fn zero(dim: usize, tag: impl Into<String>) -> Self {
        EnergyDependentOperator {
            form: OperatorForm::Zero { dim },
            derivative_override: None,
            domain: None,
            tag: tag.into(),
        }
    }

    pub fn constant(m: OperatorMatrix, tag: impl Into<String>) -> Self {
        EnergyDependentOperator {
            form: OperatorForm::Constant(m),
            derivative_override: None,
            domain: None,
            tag: tag.into(),
        }
    }

    pub fn linear(at_zero: OperatorMatrix, slope: OperatorMatrix, tag: impl Into<String>) -> Result<Self> {
        Self::new(OperatorForm::Linear { at_zero, slope }, tag)
    }

    pub fn rank1(left: Vec<Complex64>, right: Vec<Complex64>, profile: Profile, tag: impl Into<String>) -> Result<Self> {
        Self::new(OperatorForm::SeparableRank1 { left, right, profile }, tag)
    }

    /// Wraps a closure; without `derivative` the derivative is numeric.
    pub fn from_fn(
        dim: usize,
        eval: impl Fn(f64) -> OperatorMatrix + Send + Sync + 'static,
        derivative: Option<MatrixFn>,
        tag: impl Into<String>,
    ) -> Self {
        EnergyDependentOperator {
            form: OperatorForm::Function {
                dim,
                eval: Arc::new(eval),
                derivative,
            },
            derivative_override: None,
            domain: None,
            tag: tag.into(),
        }
    }

    /// Replaces the analytic derivative with an explicitly supplied operator.
    pub fn with_derivative(mut self, derivative: EnergyDependentOperator) -> Result<Self> {
        if derivative.dim() != self.dim() {
            return Err(Error::InvalidInput(format!(
                "derivative of `{}` has dimension {} instead of {}",
                self.tag,
                derivative.dim(),
                self.dim()
            )));
        }
        self.derivative_override = Some(Box::new(derivative));
        Ok(self)
    }

    pub fn with_domain(mut self, lower: f64, upper: f64) -> Result<Self> {
        if !(lower < upper) {
            return Err(Error::InvalidInput(format!("empty energy domain [{lower}, {upper}]")));
        }
        self.domain = Some((lower, upper));
        Ok(self)
    }

    fn validate_form(&self) -> Result<()> {
        match &self.form {
            OperatorForm::Linear { at_zero, slope } if at_zero.dim() != slope.dim() => Err(Error::InvalidInput(format!(
                "`{}`: constant and slope matrices differ in dimension",
                self.tag
            ))),
            OperatorForm::SeparableRank1 { left, right, .. } if left.len() != right.len() => {
                Err(Error::InvalidInput(format!("`{}`: rank-1 vectors differ in length", self.tag)))
            }
            _ => Ok(()),
        }
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    pub fn form(&self) -> &OperatorForm {
        &self.form
    }

    pub fn domain(&self) -> Option<(f64, f64)> {
        self.domain
    }

    pub fn dim(&self) -> usize {
        match &self.form {
            OperatorForm::Zero { dim } => *dim,
            OperatorForm::Constant(m) => m.dim(),
            OperatorForm::Linear { at_zero, .. } => at_zero.dim(),
            OperatorForm::SeparableRank1 { left, .. } => left.len(),
            OperatorForm::Function { dim, .. } => *dim,
        }
    }

    /// True when the operator vanishes at every energy by construction.
    pub fn is_identically_zero(&self) -> bool {
        match &self.form {
            OperatorForm::Zero { .. } => true,
            OperatorForm::Constant(m) => m.is_zero(),
            OperatorForm::Linear { at_zero, slope } => at_zero.is_zero() && slope.is_zero(),
            OperatorForm::SeparableRank1 { left, right, profile } => {
                left.iter().all(|z| z.norm() == 0.0)
                    || right.iter().all(|z| z.norm() == 0.0)
                    || matches!(profile, Profile::Polynomial(c) if c.iter().all(|&x| x == 0.0))
                    || matches!(profile, Profile::Pole { strength, .. } if *strength == 0.0)
            }
            OperatorForm::Function { .. } => false,
        }
    }

    /// True when the built-in form has no energy dependence.
    pub fn is_energy_independent(&self) -> bool {
        match &self.form {
            OperatorForm::Zero { .. } | OperatorForm::Constant(_) => true,
            OperatorForm::Linear { slope, .. } => slope.is_zero(),
            OperatorForm::SeparableRank1 { profile: Profile::Polynomial(c), .. } => c.iter().skip(1).all(|&x| x == 0.0),
            _ => false,
        }
    }

    fn check_domain(&self, e: f64) -> Result<()> {
        if let Some((lo, hi)) = self.domain {
            if !(lo..=hi).contains(&e) {
                return Err(Error::DomainError {
                    tag: self.tag.clone(),
                    energy: e,
                    lower: lo,
                    upper: hi,
                });
            }
        }
        if !e.is_finite() {
            return Err(Error::InvalidParameter(format!("`{}` evaluated at non-finite energy", self.tag)));
        }
        Ok(())
    }

    pub fn evaluate(&self, e: f64) -> Result<OperatorMatrix> {
        self.check_domain(e)?;
        Ok(match &self.form {
            OperatorForm::Zero { dim } => OperatorMatrix::zeros(*dim),
            OperatorForm::Constant(m) => m.clone(),
            OperatorForm::Linear { at_zero, slope } => at_zero + &slope.scale_real(e),
            OperatorForm::SeparableRank1 { left, right, profile } => outer(left, right, profile.value(e)),
            OperatorForm::Function { eval, .. } => eval(e),
        })
    }

    /// Analytic derivative, when one is known.
    pub fn analytic_derivative(&self, e: f64) -> Option<Result<OperatorMatrix>> {
        if let Some(d) = &self.derivative_override {
            return Some(self.check_domain(e).and_then(|_| d.evaluate(e)));
        }
        if let Err(err) = self.check_domain(e) {
            return Some(Err(err));
        }
        match &self.form {
            OperatorForm::Zero { dim } => Some(Ok(OperatorMatrix::zeros(*dim))),
            OperatorForm::Constant(m) => Some(Ok(OperatorMatrix::zeros(m.dim()))),
            OperatorForm::Linear { slope, .. } => Some(Ok(slope.clone())),
            OperatorForm::SeparableRank1 { left, right, profile } => Some(Ok(outer(left, right, profile.derivative(e)))),
            OperatorForm::Function { derivative, .. } => derivative.as_ref().map(|d| Ok(d(e))),
        }
    }

    pub fn has_analytic_derivative(&self) -> bool {
        self.derivative_override.is_some()
            || !matches!(self.form, OperatorForm::Function { derivative: None, .. })
    }

    /// Central differences at steps `h` and `h/2` combined by one Richardson
    /// step, `h = relative_step * max(1, |E|)`.
    pub fn numeric_derivative(&self, e: f64, relative_step: f64) -> Result<OperatorMatrix> {
        let h = relative_step * e.abs().max(1.0);
        if let Some((lo, hi)) = self.domain {
            if e - h < lo || e + h > hi {
                return Err(Error::DomainError {
                    tag: format!("{} (finite-difference window)", self.tag),
                    energy: e,
                    lower: lo,
                    upper: hi,
                });
            }
        }
        let central = |step: f64| -> Result<CMatrix> {
            let plus = self.evaluate(e + step)?;
            let minus = self.evaluate(e - step)?;
            Ok((plus.entries() - minus.entries()) / Complex64::new(2.0 * step, 0.0))
        };
        let coarse = central(h)?;
        let fine = central(h / 2.0)?;
        let extrapolated = (fine * Complex64::new(4.0, 0.0) - coarse) / Complex64::new(3.0, 0.0);
        OperatorMatrix::new(extrapolated)
    }

    /// Analytic derivative if available, otherwise Richardson differences.
    pub fn derivative(&self, e: f64) -> Result<OperatorMatrix> {
        match self.analytic_derivative(e) {
            Some(d) => d,
            None => self.numeric_derivative(e, RELATIVE_FD_STEP),
        }
    }

    /// Compares the analytic derivative (if any) with finite differences.
    /// Tolerance is `max(1e-8, 1e-6 * ||dM/dE||_F)`.
    pub fn check_derivative(&self, e: f64, relative_step: f64) -> Result<Option<DerivativeCheck>> {
        let Some(analytic) = self.analytic_derivative(e) else {
            return Ok(None);
        };
        let analytic = analytic?;
        let numeric = self.numeric_derivative(e, relative_step)?;
        let deviation = analytic.max_abs_diff(&numeric);
        let tolerance = derivative_tolerance(&analytic);
        if deviation > tolerance || !deviation.is_finite() {
            return Err(Error::DerivativeInconsistent {
                tag: self.tag.clone(),
                energy: e,
                deviation,
                tolerance,
            });
        }
        Ok(Some(DerivativeCheck {
            energy: e,
            deviation,
            tolerance,
        }))
    }

    /// `factor * M(E)` with the derivative scaled alongside.
    pub fn scaled(&self, factor: f64) -> Self {
        let form = match &self.form {
            OperatorForm::Zero { dim } => OperatorForm::Zero { dim: *dim },
            OperatorForm::Constant(m) => OperatorForm::Constant(m.scale_real(factor)),
            OperatorForm::Linear { at_zero, slope } => OperatorForm::Linear {
                at_zero: at_zero.scale_real(factor),
                slope: slope.scale_real(factor),
            },
            OperatorForm::SeparableRank1 { left, right, profile } => OperatorForm::SeparableRank1 {
                left: left.iter().map(|z| z * factor).collect(),
                right: right.clone(),
                profile: profile.clone(),
            },
            OperatorForm::Function { dim, eval, derivative } => {
                let eval = eval.clone();
                let derivative = derivative.clone();
                OperatorForm::Function {
                    dim: *dim,
                    eval: Arc::new(move |e| eval(e).scale_real(factor)),
                    derivative: derivative.map(|d| Arc::new(move |e| d(e).scale_real(factor)) as MatrixFn),
                }
            }
        };
        EnergyDependentOperator {
            form,
            derivative_override: self.derivative_override.as_ref().map(|d| Box::new(d.scaled(factor))),
            domain: self.domain,
            tag: self.tag.clone(),
        }
    }
}

/// Tolerance for analytic-vs-numeric derivative agreement.
pub fn derivative_tolerance(analytic: &OperatorMatrix) -> f64 {
    1e-8_f64.max(1e-6 * analytic.frobenius_norm())
}

fn outer(left: &[Complex64], right: &[Complex64], s: f64) -> OperatorMatrix {
    OperatorMatrix::from_fn(left.len(), |i, j| left[i] * right[j].conj() * s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> EnergyDependentOperator {
        EnergyDependentOperator::from_fn(1, move |e| OperatorMatrix::diagonal_real(&[f(e)]), None, "scalar")
    }

    #[test]
    fn richardson_derivative_of_a_pole() {
        let op = scalar(|e| 1.0 / (e - 1.0));
        let d = op.numeric_derivative(2.0, 1e-3).unwrap();
        assert!((d.entries()[(0, 0)].re + 1.0).abs() < 1e-8);
        let d = op.derivative(2.0).unwrap();
        assert!((d.entries()[(0, 0)].re + 1.0).abs() < 1e-9);
    }

    #[test]
    fn builtin_forms_have_consistent_derivatives() {
        let a = OperatorMatrix::from_real_rows(&[vec![0.1, 0.2], vec![0.2, -0.3]]).unwrap();
        let b = OperatorMatrix::from_real_rows(&[vec![0.5, 0.0], vec![0.0, 0.7]]).unwrap();
        let lin = EnergyDependentOperator::linear(a, b.clone(), "lin").unwrap();
        assert_eq!(lin.derivative(3.0).unwrap(), b);
        assert!(lin.check_derivative(3.0, RELATIVE_FD_STEP).unwrap().is_some());

        let r1 = EnergyDependentOperator::rank1(
            vec![Complex64::new(1.0, 0.5), Complex64::new(0.0, 1.0)],
            vec![Complex64::new(0.3, 0.0), Complex64::new(-1.0, 0.2)],
            Profile::Pole { strength: 0.4, position: -2.0 },
            "r1",
        )
        .unwrap();
        let check = r1.check_derivative(0.7, RELATIVE_FD_STEP).unwrap().unwrap();
        assert!(check.deviation < check.tolerance);
    }

    #[test]
    fn wrong_analytic_derivative_is_reported() {
        let a = OperatorMatrix::from_real_rows(&[vec![1.0]]).unwrap();
        let lin = EnergyDependentOperator::linear(a.clone(), a.scale_real(2.0), "sigma")
            .unwrap()
            .with_derivative(EnergyDependentOperator::constant(a, "wrong"))
            .unwrap();
        assert!(matches!(
            lin.check_derivative(0.0, RELATIVE_FD_STEP),
            Err(Error::DerivativeInconsistent { .. })
        ));
    }

    #[test]
    fn finite_difference_respects_domain() {
        let op = scalar(|e| e * e).with_domain(0.0, 1.0).unwrap();
        assert!(op.numeric_derivative(0.5, 1e-4).is_ok());
        assert!(matches!(op.numeric_derivative(1.0, 1e-4), Err(Error::DomainError { .. })));
        assert!(matches!(op.evaluate(1.5), Err(Error::DomainError { .. })));
    }

    #[test]
    fn scaling_scales_value_and_derivative() {
        let op = scalar(|e| e.sin()).scaled(0.1);
        let v = op.evaluate(0.3).unwrap().entries()[(0, 0)].re;
        assert!((v - 0.1 * 0.3f64.sin()).abs() < 1e-15);
        let d = op.derivative(0.3).unwrap().entries()[(0, 0)].re;
        assert!((d - 0.1 * 0.3f64.cos()).abs() < 1e-10);
    }

    #[test]
    fn profile_polynomial_derivative() {
        let p = Profile::Polynomial(vec![1.0, -2.0, 3.0]);
        assert_eq!(p.value(2.0), 1.0 - 4.0 + 12.0);
        assert_eq!(p.derivative(2.0), -2.0 + 12.0);
    }
}
