//! Cross-section assembly and the full contribution report.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::amplitude::{extract_amplitude, ChannelAmplitude};
use super::coefficients::{
    lowest_order_coefficient, se_bound_coefficient, se_free_coefficient, vertex_coefficient, ClassEntry,
};
use super::{DiagramClass, RadRecModel};
use crate::error::{Error, Result, ResultExt};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Warning {
    /// The summed coefficient is negative; reported, not fatal.
    NonPhysicalCrossSection { total_coefficient: f64 },
    /// A class was skipped because the model cannot support it.
    ClassOmitted { class: DiagramClass, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelResult {
    pub channel: usize,
    pub omega: f64,
    pub coefficient: f64,
    pub dsigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossSection {
    pub delta_k: f64,
    pub channels: Vec<ChannelResult>,
    pub total_coefficient: f64,
    pub total: f64,
    pub warnings: Vec<Warning>,
}

/// `dσ = (2π)³/v_i · C · Δk` per channel, summed over diagram classes.
pub fn assemble_cross_section(entries: &[ClassEntry], model: &RadRecModel) -> Result<CrossSection> {
    let omega = model.omega_star();
    let delta_k = model.photons().weight_at(omega)?;
    let prefactor = (2.0 * PI).powi(3) / model.v_i();
    let channels: Vec<ChannelResult> = model
        .targets()
        .into_iter()
        .map(|q| {
            let coefficient: f64 = entries.iter().map(|e| e.channel_coefficient(q)).sum();
            ChannelResult {
                channel: q,
                omega,
                coefficient,
                dsigma: prefactor * coefficient * delta_k,
            }
        })
        .collect();
    let total_coefficient: f64 = entries.iter().map(|e| e.coefficient).sum();
    let scale: f64 = entries.iter().flat_map(|e| &e.terms).map(|t| t.value.norm()).sum();
    let mut warnings = Vec::new();
    if total_coefficient < -1e-12 * scale.max(f64::MIN_POSITIVE) {
        warnings.push(Warning::NonPhysicalCrossSection { total_coefficient });
    }
    Ok(CrossSection {
        delta_k,
        total: prefactor * total_coefficient * delta_k,
        channels,
        total_coefficient,
        warnings,
    })
}

/// Everything the pipeline produces for one model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContributionReport {
    pub initial_state: usize,
    pub capture_target: usize,
    pub omega_star: f64,
    pub v_i: f64,
    pub vertex_sign: f64,
    pub classes: Vec<ClassEntry>,
    pub total_coefficient: f64,
    pub delta_k: f64,
    pub cross_section: f64,
    pub channels: Vec<ChannelResult>,
    pub amplitudes: Vec<ChannelAmplitude>,
    pub warnings: Vec<Warning>,
}

impl ContributionReport {
    pub fn class(&self, class: DiagramClass) -> Option<&ClassEntry> {
        self.classes.iter().find(|c| c.class == class)
    }

    /// `Σ_q |τ_q|²`.
    pub fn amplitude_norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.value.norm_sqr()).sum()
    }
}

/// Classes the model supports, or why one is skipped. Classes whose
/// insertion vanishes identically are left out of the report.
fn plan(model: &RadRecModel) -> (Vec<DiagramClass>, Vec<Warning>) {
    let sigma = !model.sigma().is_identically_zero();
    let lambda = !model.lambda_vx().is_identically_zero();
    let mut classes = vec![DiagramClass::LowestOrder];
    let mut warnings = Vec::new();
    if sigma {
        classes.push(DiagramClass::SelfEnergyBound);
    }
    if lambda {
        classes.push(DiagramClass::Vertex);
    }
    if sigma {
        if model.spectrum().continuum_interval().is_some() {
            classes.push(DiagramClass::SelfEnergyFree);
        } else {
            warnings.push(Warning::ClassOmitted {
                class: DiagramClass::SelfEnergyFree,
                reason: "the spectrum has no electron continuum".into(),
            });
        }
    }
    (classes, warnings)
}

fn class_entry(class: DiagramClass, model: &RadRecModel) -> Result<ClassEntry> {
    match class {
        DiagramClass::LowestOrder => lowest_order_coefficient(model),
        DiagramClass::SelfEnergyBound => se_bound_coefficient(model),
        DiagramClass::Vertex => vertex_coefficient(model),
        DiagramClass::SelfEnergyFree => se_free_coefficient(model),
    }
    .context(|| format!("diagram class {class}"))
}

/// Runs every supported class, assembles cross sections and amplitudes.
pub fn build_report(model: &RadRecModel) -> Result<ContributionReport> {
    let (classes, mut warnings) = plan(model);
    let entries = classes
        .par_iter()
        .map(|&c| class_entry(c, model))
        .collect::<Result<Vec<_>>>()?;
    let xs = assemble_cross_section(&entries, model)?;
    let amplitudes = extract_amplitude(model).context(|| "amplitude extraction".to_string())?;
    warnings.extend(xs.warnings);
    let report = ContributionReport {
        initial_state: model.initial_state(),
        capture_target: model.capture_target(),
        omega_star: model.omega_star(),
        v_i: model.v_i(),
        vertex_sign: model.vertex_sign(),
        total_coefficient: xs.total_coefficient,
        delta_k: xs.delta_k,
        cross_section: xs.total,
        channels: xs.channels,
        classes: entries,
        amplitudes,
        warnings,
    };
    if !report.total_coefficient.is_finite() {
        return Err(Error::InvalidModel("report contains non-finite coefficients".into()));
    }
    Ok(report)
}
