//! Symbolic diagram terms: ordered operator products that the cut rules and
//! the model-space rewrite act on.
//!
//! Terms read left to right as matrix products; time runs right to left, so
//! the rightmost interaction acts first on the initial state.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Operator symbol appearing in a ladder.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OperatorRef {
    /// Photon interaction `A`; emits or absorbs one photon.
    Photon,
    /// Self-energy insertion `Σ`.
    SelfEnergy,
    /// Vertex-corrected photon interaction `Λ`; emits or absorbs one photon.
    Vertex,
    /// Generic instantaneous potential `V`.
    Potential,
}

impl OperatorRef {
    pub fn changes_photon_number(&self) -> bool {
        matches!(self, OperatorRef::Photon | OperatorRef::Vertex)
    }

    fn symbol(&self) -> &'static str {
        match self {
            OperatorRef::Photon => "A",
            OperatorRef::SelfEnergy => "Σ",
            OperatorRef::Vertex => "Λ",
            OperatorRef::Potential => "V",
        }
    }
}

/// Energy argument of a factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EnergyArg {
    /// The model-space energy `𝓔`.
    Model,
    /// An intermediate model-space energy `𝓔′`.
    Intermediate,
    /// `𝓔 − ω` while a photon is in flight.
    PhotonShifted,
}

impl fmt::Display for EnergyArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EnergyArg::Model => "𝓔",
            EnergyArg::Intermediate => "𝓔′",
            EnergyArg::PhotonShifted => "𝓔−ω",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ResolventSymbol {
    Full,
    ReducedQ,
    ProjectedP,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Factor {
    Interaction { op: OperatorRef, energy: EnergyArg },
    Resolvent { kind: ResolventSymbol, energy: EnergyArg },
    /// Projector onto the model-space block at the given energy.
    Projector { energy: EnergyArg },
    /// On-shell replacement `1/(x + iη) → −2πi δ(x)`.
    Cut { energy: EnergyArg },
    /// `∂/∂𝓔` acting on the factors `start..end`.
    DerivativeMark { start: usize, end: usize },
}

impl Factor {
    pub fn interaction(op: OperatorRef, energy: EnergyArg) -> Self {
        Factor::Interaction { op, energy }
    }

    pub fn resolvent(energy: EnergyArg) -> Self {
        Factor::Resolvent {
            kind: ResolventSymbol::Full,
            energy,
        }
    }

    pub fn is_resolvent(&self) -> bool {
        matches!(self, Factor::Resolvent { .. })
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Factor::Interaction { op, energy } => match energy {
                EnergyArg::Model => f.write_str(op.symbol()),
                _ => write!(f, "{}({energy})", op.symbol()),
            },
            Factor::Resolvent { kind, energy } => {
                let sym = match kind {
                    ResolventSymbol::Full => "Γ",
                    ResolventSymbol::ReducedQ => "Γ_Q",
                    ResolventSymbol::ProjectedP => "Γ_P",
                };
                write!(f, "{sym}({energy})")
            }
            Factor::Projector { energy } => write!(f, "P[{energy}]"),
            Factor::Cut { energy } => write!(f, "δ({energy})"),
            Factor::DerivativeMark { start, end } => write!(f, "∂[{start}..{end}]"),
        }
    }
}

/// Ordered symbolic product with a diagram label.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TermExpression {
    pub label: String,
    pub factors: Vec<Factor>,
}

impl TermExpression {
    pub fn new(label: impl Into<String>, factors: Vec<Factor>) -> Result<Self> {
        let term = TermExpression {
            label: label.into(),
            factors,
        };
        term.validate()?;
        Ok(term)
    }

    /// Builds `op_1 Γ op_2 Γ … op_k` with energy arguments inferred from the
    /// photon count at each point of the ladder.
    pub fn ladder(label: impl Into<String>, ops: &[OperatorRef]) -> Result<Self> {
        if ops.is_empty() {
            return Err(Error::InvalidTerm("a ladder needs at least one interaction".into()));
        }
        let mut photons = 0usize;
        let mut rev: Vec<Factor> = Vec::with_capacity(2 * ops.len());
        for (k, op) in ops.iter().rev().enumerate() {
            if k > 0 {
                rev.push(Factor::resolvent(energy_for(photons)));
            }
            let before = photons;
            if op.changes_photon_number() {
                photons = if photons == 0 { 1 } else { photons - 1 };
            }
            // An interaction that changes the photon number sees the energy of
            // the electron line it acts on, i.e. the photon-free side.
            let seen = if op.changes_photon_number() { 0 } else { before };
            rev.push(Factor::interaction(op.clone(), energy_for(seen)));
        }
        rev.reverse();
        Self::new(label, rev)
    }

    fn validate(&self) -> Result<()> {
        if self.factors.is_empty() {
            return Err(Error::InvalidTerm(format!("`{}` has no factors", self.label)));
        }
        for (i, f) in self.factors.iter().enumerate() {
            if let Factor::DerivativeMark { start, end } = f {
                if start >= end || *end > self.factors.len() || (*start..*end).contains(&i) {
                    return Err(Error::InvalidTerm(format!(
                        "`{}`: derivative span {start}..{end} at position {i} is malformed",
                        self.label
                    )));
                }
            }
        }
        Ok(())
    }

    /// Strictly alternating interactions and resolvents, starting and ending
    /// with an interaction.
    pub fn is_ladder(&self) -> bool {
        self.factors.len() % 2 == 1
            && self.factors.iter().enumerate().all(|(i, f)| match f {
                Factor::Interaction { .. } => i % 2 == 0,
                Factor::Resolvent { .. } => i % 2 == 1,
                _ => false,
            })
    }

    pub fn resolvent_positions(&self) -> Vec<usize> {
        (0..self.factors.len()).filter(|&i| self.factors[i].is_resolvent()).collect()
    }

    /// Photon count in flight at every resolvent, reading right to left.
    /// Fails unless the term starts and ends without photons.
    pub fn photon_counts(&self) -> Result<Vec<(usize, usize)>> {
        if !self.is_ladder() {
            return Err(Error::InvalidTerm(format!("`{}` is not in ladder form: {self}", self.label)));
        }
        let mut photons: i64 = 0;
        let mut out = Vec::new();
        for (i, f) in self.factors.iter().enumerate().rev() {
            match f {
                Factor::Interaction { op, .. } if op.changes_photon_number() => {
                    photons = if photons == 0 { 1 } else { photons - 1 };
                }
                Factor::Resolvent { .. } => out.push((i, photons as usize)),
                _ => {}
            }
        }
        if photons != 0 {
            return Err(Error::InvalidTerm(format!(
                "`{}` leaves {photons} photon(s) unabsorbed",
                self.label
            )));
        }
        out.reverse();
        Ok(out)
    }

    /// Replaces the resolvent at `index` by an on-shell cut.
    pub fn with_cut(&self, index: usize) -> Result<Self> {
        let energy = self.resolvent_energy(index)?;
        let mut factors = self.factors.clone();
        factors[index] = Factor::Cut { energy };
        Ok(TermExpression {
            label: self.label.clone(),
            factors,
        })
    }

    /// Model-space rewrite of a quasi-singular resolvent: it becomes a
    /// projector, and everything to its left is differentiated with respect
    /// to the model energy.
    pub fn with_model_space_rewrite(&self, index: usize) -> Result<Self> {
        let energy = self.resolvent_energy(index)?;
        let mut factors = Vec::with_capacity(self.factors.len() + 1);
        factors.push(Factor::DerivativeMark { start: 1, end: index + 1 });
        factors.extend(self.factors[..index].iter().cloned());
        factors.push(Factor::Projector { energy });
        factors.extend(self.factors[index + 1..].iter().cloned());
        TermExpression::new(self.label.clone(), factors)
    }

    fn resolvent_energy(&self, index: usize) -> Result<EnergyArg> {
        match self.factors.get(index) {
            Some(Factor::Resolvent { energy, .. }) => Ok(*energy),
            _ => Err(Error::InvalidTerm(format!(
                "position {index} of `{}` is not a resolvent",
                self.label
            ))),
        }
    }
}

fn energy_for(photons: usize) -> EnergyArg {
    if photons > 0 {
        EnergyArg::PhotonShifted
    } else {
        EnergyArg::Model
    }
}

impl fmt::Display for TermExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, factor) in self.factors.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{factor}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use OperatorRef::*;

    #[test]
    fn ladder_infers_photon_shifted_energies() {
        let t = TermExpression::ladder("se", &[Photon, SelfEnergy, Photon]).unwrap();
        assert_eq!(t.to_string(), "A Γ(𝓔−ω) Σ(𝓔−ω) Γ(𝓔−ω) A");
        assert!(t.is_ladder());
        assert_eq!(t.photon_counts().unwrap(), vec![(1, 1), (3, 1)]);

        let free = TermExpression::ladder("free", &[Photon, Photon, SelfEnergy]).unwrap();
        assert_eq!(free.to_string(), "A Γ(𝓔−ω) A Γ(𝓔) Σ");
    }

    #[test]
    fn unbalanced_photons_are_rejected() {
        let t = TermExpression::ladder("bad", &[Photon, SelfEnergy]).unwrap();
        assert!(matches!(t.photon_counts(), Err(Error::InvalidTerm(_))));
    }

    #[test]
    fn non_ladder_terms_are_rejected() {
        let t = TermExpression::new("x", vec![Factor::resolvent(EnergyArg::Model)]).unwrap();
        assert!(!t.is_ladder());
        assert!(t.photon_counts().is_err());
        assert!(TermExpression::new("y", vec![Factor::DerivativeMark { start: 0, end: 1 }]).is_err());
    }

    #[test]
    fn rewrites() {
        let t = TermExpression::ladder("lo", &[Photon, Photon]).unwrap();
        assert_eq!(t.with_cut(1).unwrap().to_string(), "A δ(𝓔−ω) A");
        assert!(t.with_cut(0).is_err());

        let se = TermExpression::ladder("se", &[Photon, SelfEnergy, Photon]).unwrap();
        let msc = se.with_model_space_rewrite(3).unwrap();
        assert_eq!(msc.to_string(), "∂[1..4] A Γ(𝓔−ω) Σ(𝓔−ω) P[𝓔−ω] A");
    }
}
