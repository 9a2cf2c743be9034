//! Amplitude extraction, `τ(p→q) ≈ ⟨q|A + ½(X + Y†)|p⟩`.
//!
//! Each first-order coefficient term has the shape `⟨p|A|q⟩⟨q|X|p⟩`
//! (X side) or `⟨p|Y|q⟩⟨q|A|p⟩` (Y side). A piece of the amplitude enters
//! with half the number of coefficient terms it pairs with, so a piece that
//! appears on both sides gets factor 1 and a piece that appears once gets ½.
//! The factors are derived from the pairing table below, not hard-coded.

use num_complex::Complex64;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::coefficients::{free_line, sandwich, weighted_reduced_resolvent, OnShell};
use super::{DiagramClass, RadRecModel};
use crate::error::{Result, ResultExt};
use crate::greens::checked_derivative;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AmplitudePiece {
    /// `A`
    Photon,
    /// `Σ Γ_Q A`
    SigmaReducedA,
    /// `Σ P ∂A/∂𝓔`
    SigmaDerivA,
    /// `∂Σ/∂𝓔 P A`
    DerivSigmaA,
    /// `±Λ`
    Vertex,
    /// `A Γ_pole Σ`
    FreePole,
}

impl AmplitudePiece {
    pub const ALL: [AmplitudePiece; 6] = [
        AmplitudePiece::Photon,
        AmplitudePiece::SigmaReducedA,
        AmplitudePiece::SigmaDerivA,
        AmplitudePiece::DerivSigmaA,
        AmplitudePiece::Vertex,
        AmplitudePiece::FreePole,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            AmplitudePiece::Photon => "A",
            AmplitudePiece::SigmaReducedA => "ΣΓ_QA",
            AmplitudePiece::SigmaDerivA => "ΣP∂A",
            AmplitudePiece::DerivSigmaA => "∂ΣPA",
            AmplitudePiece::Vertex => "Λ",
            AmplitudePiece::FreePole => "AΓ_poleΣ",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairingSide {
    /// `⟨p|A|q⟩⟨q|X|p⟩`: the piece is `X`.
    X,
    /// `⟨p|Y|q⟩⟨q|A|p⟩`: the piece is `Y†`.
    Y,
}

/// One coefficient term (or one part of it) and the amplitude piece it pairs with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pairing {
    pub class: DiagramClass,
    pub term: &'static str,
    pub piece: AmplitudePiece,
    pub side: PairingSide,
}

/// The symbolic pairing table for all first-order coefficient terms.
pub fn amplitude_pairings() -> Vec<Pairing> {
    use AmplitudePiece::{DerivSigmaA, FreePole, SigmaDerivA, SigmaReducedA};
    use DiagramClass::{SelfEnergyBound, SelfEnergyFree};
    use PairingSide::*;
    let p = |class, term, piece, side| Pairing { class, term, piece, side };
    vec![
        p(SelfEnergyBound, "A·ΣΓ_QA", SigmaReducedA, X),
        p(SelfEnergyBound, "AΓ_QΣ·A", SigmaReducedA, Y),
        // the derivative of the product A|q⟩⟨q|Σ has one part of each kind
        p(SelfEnergyBound, "∂(AΣ)·A", DerivSigmaA, X),
        p(SelfEnergyBound, "∂(AΣ)·A", SigmaDerivA, Y),
        p(SelfEnergyBound, "∂A·Σ·A", SigmaDerivA, Y),
        p(DiagramClass::Vertex, "Λ·A", AmplitudePiece::Vertex, Y),
        p(DiagramClass::Vertex, "A·Λ", AmplitudePiece::Vertex, X),
        p(SelfEnergyFree, "A·AΓ_poleΣ", FreePole, X),
        p(SelfEnergyFree, "ΣΓ_poleA·A", FreePole, Y),
    ]
}

/// Factor of a piece in `τ`: ½ × (number of pairings), 1 for the bare `A`.
pub fn piece_factor(piece: AmplitudePiece) -> Ratio<i64> {
    if piece == AmplitudePiece::Photon {
        return Ratio::from_integer(1);
    }
    let count = amplitude_pairings().iter().filter(|p| p.piece == piece).count() as i64;
    Ratio::new(count, 2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeTerm {
    pub piece: AmplitudePiece,
    pub name: String,
    pub factor: Ratio<i64>,
    /// `⟨q|piece|p⟩` before the factor is applied.
    pub value: Complex64,
}

impl AmplitudeTerm {
    pub fn contribution(&self) -> Complex64 {
        self.value * (*self.factor.numer() as f64 / *self.factor.denom() as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelAmplitude {
    pub channel: usize,
    pub value: Complex64,
    pub terms: Vec<AmplitudeTerm>,
}

/// `τ(p→q)` for every target channel `q`, with its named pieces.
pub fn extract_amplitude(model: &RadRecModel) -> Result<Vec<ChannelAmplitude>> {
    let os = OnShell::new(model)?;
    let p = os.p;
    let step = model.numerics().fd_step;
    let sigma_active = !model.sigma().is_identically_zero();
    let (sigma, dsigma, da, gq) = if sigma_active {
        (
            Some(model.sigma().evaluate(os.ea)?),
            Some(checked_derivative(model.sigma(), os.ea, step).context(|| "Σ derivative at ε_a".to_string())?),
            Some(model.photons().coupling_derivative(os.omega, step)?),
            weighted_reduced_resolvent(model, os.ea),
        )
    } else {
        (None, None, None, vec![])
    };
    let free_active = sigma_active && model.spectrum().continuum_interval().is_some();
    let sigma_p = if free_active { Some(model.sigma().evaluate(os.ep)?) } else { None };
    let lambda = model.lambda_vx().evaluate(os.ea)?;
    let zero = Complex64::new(0.0, 0.0);

    let mut out = Vec::with_capacity(os.targets.len());
    for &q in &os.targets {
        let mut values = [zero; 6];
        values[0] = os.a(q, p);
        if let (Some(sigma), Some(dsigma), Some(da)) = (&sigma, &dsigma, &da) {
            values[1] = sandwich(sigma, &gq, &os.a, q, p);
            for &qp in &os.targets {
                values[2] += sigma.entries()[(q, qp)] * da.entries()[(qp, p)];
                values[3] += dsigma.entries()[(q, qp)] * os.a(qp, p);
            }
        }
        values[4] = lambda.entries()[(q, p)] * model.vertex_sign();
        if let Some(sigma_p) = &sigma_p {
            values[5] = free_line(model, &os, sigma_p, q)?.forward.1;
        }
        let terms: Vec<AmplitudeTerm> = AmplitudePiece::ALL
            .iter()
            .zip(values)
            .map(|(&piece, value)| AmplitudeTerm {
                piece,
                name: piece.name().to_string(),
                factor: piece_factor(piece),
                value,
            })
            .collect();
        let value = terms.iter().map(AmplitudeTerm::contribution).sum();
        out.push(ChannelAmplitude { channel: q, value, terms });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairing_factors() {
        assert_eq!(piece_factor(AmplitudePiece::DerivSigmaA), Ratio::new(1, 2));
        assert_eq!(piece_factor(AmplitudePiece::SigmaDerivA), Ratio::from_integer(1));
        assert_eq!(piece_factor(AmplitudePiece::SigmaReducedA), Ratio::from_integer(1));
        assert_eq!(piece_factor(AmplitudePiece::Vertex), Ratio::from_integer(1));
        assert_eq!(piece_factor(AmplitudePiece::FreePole), Ratio::from_integer(1));
        assert_eq!(piece_factor(AmplitudePiece::Photon), Ratio::from_integer(1));
    }
}
