//! Finite-basis Green's-operator toolkit for scattering with bound states,
//! with a radiative-recombination pipeline on top.
//!
//! Layers, bottom up: [`spectral`] (basis, projectors, dense operators),
//! [`singularity`] (resolvents, principal values), [`greens`] (ladders,
//! counterterms, model-space contributions), [`radrec`] (diagram classes,
//! cross sections, amplitudes) and [`verify`] (independent oracles).

pub mod error;
pub mod fixtures;
pub mod greens;
pub mod operator;
pub mod quad;
pub mod radrec;
pub mod singularity;
pub mod spectral;
pub mod term;
pub mod verify;

pub use error::{Error, Result};
pub use operator::{EnergyDependentOperator, OperatorForm, Profile};
pub use spectral::{build_spectrum, projectors, ContinuumGrid, ModelSpace, OperatorMatrix, Spectrum};
