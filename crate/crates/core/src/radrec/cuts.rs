//! Cut placement for the modified Cutkosky rules.
//!
//! A resolvent can go on shell only where an emitted photon is in flight:
//! there the degeneracy `ε_p = ε_q + ω` involves the free photon energy and
//! the cut is a continuum delta. Once one cut fixes `ω`, any other
//! photon-carrying resolvent meets a discrete degeneracy and is handled by a
//! model-space contribution; photon-free resolvents through the electron
//! continuum give principal value plus half pole.

use serde::{Deserialize, Serialize};

use super::{DiagramClass, RadRecModel};
use crate::error::{Error, Result};
use crate::term::TermExpression;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CutEnvironment {
    /// Degeneracy through a free photon energy: PV + half pole.
    Continuum,
    /// Degeneracy at fixed photon energy: model-space contribution.
    Discrete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ResidualTreatment {
    /// Photon energy already fixed by the cut.
    ModelSpace,
    /// Photon-free resolvent whose electron continuum contains `ε_p`.
    HalfPole,
    /// Never singular.
    Regular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Residual {
    pub index: usize,
    pub environment: CutEnvironment,
    pub treatment: ResidualTreatment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutPlacement {
    pub term: TermExpression,
    pub cut_index: usize,
    pub on_shell_energy: f64,
    pub environment: CutEnvironment,
    /// The other resolvents of the term and how each is treated.
    pub residuals: Vec<Residual>,
}

impl CutPlacement {
    /// The term with the cut inserted and the model-space rewrite applied to
    /// the first residual that needs it.
    pub fn rewritten(&self) -> Result<TermExpression> {
        let cut = self.term.with_cut(self.cut_index)?;
        match self.residuals.iter().find(|r| r.treatment == ResidualTreatment::ModelSpace) {
            Some(r) => {
                // the rewrite prepends the derivative marker, shifting every
                // original position by one
                let mut msc = self.term.with_model_space_rewrite(r.index)?;
                msc.factors[self.cut_index + 1] = cut.factors[self.cut_index].clone();
                Ok(msc)
            }
            None => Ok(cut),
        }
    }
}

/// One placement per resolvent that can go on shell.
pub fn enumerate_cuts(term: &TermExpression, model: &RadRecModel) -> Result<Vec<CutPlacement>> {
    let counts = term
        .photon_counts()
        .map_err(|e| Error::InvalidTerm(format!("cannot cut `{}`: {e}", term.label)))?;
    let omega_star = model.omega_star();
    let ep = model.energy_p();
    let electron_pole = model
        .spectrum()
        .continuum_interval()
        .is_some_and(|(lo, hi)| ep > lo && ep < hi);

    let candidates: Vec<usize> = counts.iter().filter(|(_, n)| *n > 0).map(|(i, _)| *i).collect();
    Ok(candidates
        .iter()
        .map(|&cut_index| {
            let residuals = counts
                .iter()
                .filter(|(i, _)| *i != cut_index)
                .map(|&(index, photons)| {
                    let (environment, treatment) = if photons > 0 {
                        (CutEnvironment::Discrete, ResidualTreatment::ModelSpace)
                    } else if electron_pole {
                        (CutEnvironment::Continuum, ResidualTreatment::HalfPole)
                    } else {
                        (CutEnvironment::Continuum, ResidualTreatment::Regular)
                    };
                    Residual {
                        index,
                        environment,
                        treatment,
                    }
                })
                .collect();
            CutPlacement {
                term: term.clone(),
                cut_index,
                on_shell_energy: omega_star,
                environment: CutEnvironment::Continuum,
                residuals,
            }
        })
        .collect())
}

/// Placements for every term of a diagram class.
pub fn enumerate_class_cuts(class: DiagramClass, model: &RadRecModel) -> Result<Vec<CutPlacement>> {
    let mut out = Vec::new();
    for term in class.terms() {
        out.extend(enumerate_cuts(&term, model)?);
    }
    Ok(out)
}
