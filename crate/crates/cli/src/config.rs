//! JSON model configuration (`schema_version` 1) and its translation into a
//! validated [`RadRecModel`].
//!
//! Parsing goes through `serde_path_to_error` so that schema violations name
//! the offending field; semantic checks that need more than one field report
//! the path by hand.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use radrec_core::radrec::{Numerics, PhotonGrid, PhotonMode, RadRecModel, RadRecParts};
use radrec_core::spectral::QuadratureRule;
use radrec_core::{build_spectrum, ContinuumGrid, EnergyDependentOperator, OperatorMatrix, Profile};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub schema_version: u32,
    pub spectrum: SpectrumConfig,
    pub photons: PhotonConfig,
    /// Bound-state self-energy Σ(E); absent means zero.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<OperatorConfig>,
    /// Vertex insertion Λ(E); absent means zero.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<OperatorConfig>,
    pub capture_target: usize,
    pub initial_state: usize,
    #[serde(default = "default_v_i")]
    pub v_i: f64,
    #[serde(default = "default_vertex_sign")]
    pub vertex_sign: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degeneracy_tol: Option<f64>,
    #[serde(default)]
    pub numerics: NumericsConfig,
}

fn default_v_i() -> f64 {
    1.0
}

fn default_vertex_sign() -> f64 {
    -1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    /// Bound-state energies; they come first in the basis, in this order.
    #[serde(default)]
    pub bound: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub continuum: Option<GridConfig>,
}

/// A one-dimensional grid: either uniform over `[min, max]` or explicit nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "grid", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GridConfig {
    Uniform {
        min: f64,
        max: f64,
        points: usize,
        #[serde(default)]
        rule: QuadratureRule,
    },
    Explicit { nodes: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhotonConfig {
    pub modes: ModesConfig,
    pub coupling: OperatorConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "grid", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModesConfig {
    Uniform { min: f64, max: f64, count: usize },
    Explicit { modes: Vec<ModeConfig> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeConfig {
    pub omega: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fd_step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OperatorKind {
    Zero,
    /// A literal matrix, energy independent.
    Matrix,
    /// Same as `matrix`; kept as the built-in's name.
    Constant,
    /// `at_zero + E·slope`.
    LinearInE,
    /// `profile(E) |left⟩⟨right|`.
    SeparableRank1,
}

/// Complex entries are either a bare real number or an `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexValue {
    Real(f64),
    Pair([f64; 2]),
}

impl ComplexValue {
    fn value(self) -> Complex64 {
        match self {
            ComplexValue::Real(re) => Complex64::new(re, 0.0),
            ComplexValue::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

pub type MatrixValue = Vec<Vec<ComplexValue>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProfileConfig {
    Polynomial { coefficients: Vec<f64> },
    Pole { strength: f64, position: f64 },
}

/// An energy-dependent operator. Which payload fields are required depends
/// on `kind`; the others must be absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorConfig {
    pub kind: OperatorKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<MatrixValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub at_zero: Option<MatrixValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope: Option<MatrixValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub left: Option<Vec<ComplexValue>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub right: Option<Vec<ComplexValue>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<ProfileConfig>,
    /// Analytic derivative, cross-checked against finite differences at load.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derivative: Option<Box<OperatorConfig>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<[f64; 2]>,
}

impl OperatorConfig {
    pub fn zero() -> Self {
        OperatorConfig {
            kind: OperatorKind::Zero,
            matrix: None,
            at_zero: None,
            slope: None,
            left: None,
            right: None,
            profile: None,
            derivative: None,
            domain: None,
        }
    }

    pub fn constant(matrix: MatrixValue) -> Self {
        OperatorConfig {
            kind: OperatorKind::Constant,
            matrix: Some(matrix),
            ..Self::zero()
        }
    }
}

/// Command-line overrides applied on top of the file's `numerics`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Overrides {
    pub eta: Option<f64>,
    pub fd_step: Option<f64>,
}

/// Reads and schema-checks a config file without building the model.
pub fn read_config(path: &Path) -> CliResult<ModelConfig> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> CliResult<ModelConfig> {
    let mut de = serde_json::Deserializer::from_str(text);
    let config: ModelConfig = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { "$".to_string() } else { path };
        CliError::config(path, e.into_inner().to_string())
    })?;
    de.end().map_err(|e| CliError::config("$", e.to_string()))?;
    if config.schema_version != SCHEMA_VERSION {
        return Err(CliError::config(
            "schema_version",
            format!("unsupported schema version {} (expected {SCHEMA_VERSION})", config.schema_version),
        ));
    }
    Ok(config)
}

/// `read_config` followed by [`ModelConfig::build`].
pub fn load_model(path: &Path, overrides: Overrides) -> CliResult<RadRecModel> {
    read_config(path)?.build(overrides)
}

impl ModelConfig {
    /// Builds the model and runs every load-time check: type invariants,
    /// emission kinematics, analytic-derivative cross-checks, and coverage of
    /// `ω*` by the photon grid.
    pub fn build(&self, overrides: Overrides) -> CliResult<RadRecModel> {
        let continuum = self.spectrum.continuum.as_ref().map(|g| g.to_grid());
        let spectrum = build_spectrum(&self.spectrum.bound, continuum.as_ref()).map_err(|e| e.context("spectrum"))?;
        let dim = spectrum.dim();

        let coupling = build_operator(&self.photons.coupling, dim, "photons.coupling", "A")?;
        let photons = self.photons.modes.build(coupling)?;
        let sigma = match &self.sigma {
            Some(cfg) => build_operator(cfg, dim, "sigma", "sigma")?,
            None => EnergyDependentOperator::zero(dim, "sigma"),
        };
        let lambda = match &self.lambda {
            Some(cfg) => build_operator(cfg, dim, "lambda", "lambda")?,
            None => EnergyDependentOperator::zero(dim, "lambda"),
        };

        let defaults = Numerics::default();
        let numerics = Numerics {
            fd_step: overrides.fd_step.or(self.numerics.fd_step).unwrap_or(defaults.fd_step),
            eta: overrides.eta.or(self.numerics.eta).or(defaults.eta),
        };
        let mut parts = RadRecParts::new(spectrum, photons, sigma, lambda, self.capture_target, self.initial_state);
        parts.v_i = self.v_i;
        parts.vertex_sign = self.vertex_sign;
        if let Some(tol) = self.degeneracy_tol {
            if !(tol > 0.0) || !tol.is_finite() {
                return Err(CliError::config("degeneracy_tol", format!("must be positive and finite, got {tol}")));
            }
            parts.degeneracy_tol = tol;
        }
        parts.numerics = numerics;
        let model = RadRecModel::new(parts)?;

        model.check_derivatives().map_err(|e| e.context("analytic derivative check"))?;
        let omega = model.omega_star();
        model
            .photons()
            .coupling_at(omega)
            .and_then(|_| model.photons().weight_at(omega))
            .map_err(|e| e.context(format!("photons.modes must cover ω* = {omega}")))?;
        Ok(model)
    }
}

impl GridConfig {
    pub fn to_grid(&self) -> ContinuumGrid {
        match self {
            GridConfig::Uniform { min, max, points, rule } => ContinuumGrid::Uniform {
                min: *min,
                max: *max,
                n_points: *points,
                rule: *rule,
            },
            GridConfig::Explicit { nodes } => ContinuumGrid::Explicit { nodes: nodes.clone() },
        }
    }
}

impl ModesConfig {
    pub fn build(&self, coupling: EnergyDependentOperator) -> CliResult<PhotonGrid> {
        let grid = match self {
            ModesConfig::Uniform { min, max, count } => PhotonGrid::uniform(*min, *max, *count, coupling),
            ModesConfig::Explicit { modes } => PhotonGrid::new(
                modes
                    .iter()
                    .map(|m| PhotonMode {
                        omega: m.omega,
                        weight: m.weight,
                    })
                    .collect(),
                coupling,
            ),
        };
        grid.map_err(|e| e.context("photons.modes").into())
    }

    /// Range of the configured modes, used when a sweep re-discretizes them.
    pub fn range(&self) -> Option<(f64, f64)> {
        match self {
            ModesConfig::Uniform { min, max, .. } => Some((*min, *max)),
            ModesConfig::Explicit { modes } => Some((modes.first()?.omega, modes.last()?.omega)),
        }
    }
}

fn build_operator(cfg: &OperatorConfig, dim: usize, path: &str, tag: &str) -> CliResult<EnergyDependentOperator> {
    let allowed: &[&str] = match cfg.kind {
        OperatorKind::Zero => &[],
        OperatorKind::Matrix | OperatorKind::Constant => &["matrix"],
        OperatorKind::LinearInE => &["at_zero", "slope"],
        OperatorKind::SeparableRank1 => &["left", "right", "profile"],
    };
    let present = [
        ("matrix", cfg.matrix.is_some()),
        ("at_zero", cfg.at_zero.is_some()),
        ("slope", cfg.slope.is_some()),
        ("left", cfg.left.is_some()),
        ("right", cfg.right.is_some()),
        ("profile", cfg.profile.is_some()),
    ];
    for (field, is_set) in present {
        if is_set && !allowed.contains(&field) {
            return Err(CliError::config(
                format!("{path}.{field}"),
                format!("not allowed for kind `{}`", kind_name(cfg.kind)),
            ));
        }
        if !is_set && allowed.contains(&field) {
            return Err(CliError::config(
                format!("{path}.{field}"),
                format!("required for kind `{}`", kind_name(cfg.kind)),
            ));
        }
    }

    let op = match cfg.kind {
        OperatorKind::Zero => EnergyDependentOperator::zero(dim, tag),
        OperatorKind::Matrix | OperatorKind::Constant => {
            let m = matrix(cfg.matrix.as_ref().unwrap(), dim, &format!("{path}.matrix"))?;
            EnergyDependentOperator::constant(m, tag)
        }
        OperatorKind::LinearInE => {
            let a = matrix(cfg.at_zero.as_ref().unwrap(), dim, &format!("{path}.at_zero"))?;
            let b = matrix(cfg.slope.as_ref().unwrap(), dim, &format!("{path}.slope"))?;
            EnergyDependentOperator::linear(a, b, tag).map_err(|e| e.context(path.to_string()))?
        }
        OperatorKind::SeparableRank1 => {
            let left = vector(cfg.left.as_ref().unwrap(), dim, &format!("{path}.left"))?;
            let right = vector(cfg.right.as_ref().unwrap(), dim, &format!("{path}.right"))?;
            let profile = match cfg.profile.as_ref().unwrap() {
                ProfileConfig::Polynomial { coefficients } => {
                    if coefficients.is_empty() {
                        return Err(CliError::config(format!("{path}.profile.coefficients"), "must not be empty"));
                    }
                    Profile::Polynomial(coefficients.clone())
                }
                ProfileConfig::Pole { strength, position } => Profile::Pole {
                    strength: *strength,
                    position: *position,
                },
            };
            EnergyDependentOperator::rank1(left, right, profile, tag).map_err(|e| e.context(path.to_string()))?
        }
    };
    let op = match &cfg.domain {
        Some([lo, hi]) => op.with_domain(*lo, *hi).map_err(|e| e.context(format!("{path}.domain")))?,
        None => op,
    };
    match &cfg.derivative {
        Some(d) => {
            let dpath = format!("{path}.derivative");
            if d.derivative.is_some() {
                return Err(CliError::config(format!("{dpath}.derivative"), "nested derivatives are not supported"));
            }
            let deriv = build_operator(d, dim, &dpath, &format!("d{tag}/dE"))?;
            Ok(op.with_derivative(deriv).map_err(|e| e.context(dpath))?)
        }
        None => Ok(op),
    }
}

fn kind_name(kind: OperatorKind) -> &'static str {
    match kind {
        OperatorKind::Zero => "zero",
        OperatorKind::Matrix => "matrix",
        OperatorKind::Constant => "constant",
        OperatorKind::LinearInE => "linear-in-e",
        OperatorKind::SeparableRank1 => "separable-rank1",
    }
}

fn matrix(rows: &MatrixValue, dim: usize, path: &str) -> CliResult<OperatorMatrix> {
    if rows.len() != dim {
        return Err(CliError::config(
            path,
            format!("expected {dim} rows to match the spectrum, got {}", rows.len()),
        ));
    }
    let mut out = Vec::with_capacity(dim);
    for (i, row) in rows.iter().enumerate() {
        out.push(vector(row, dim, &format!("{path}[{i}]"))?);
    }
    Ok(OperatorMatrix::from_rows(&out).map_err(|e| e.context(path.to_string()))?)
}

fn vector(values: &[ComplexValue], dim: usize, path: &str) -> CliResult<Vec<Complex64>> {
    if values.len() != dim {
        return Err(CliError::config(path, format!("expected {dim} entries, got {}", values.len())));
    }
    let out: Vec<Complex64> = values.iter().map(|v| v.value()).collect();
    if let Some(j) = out.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(CliError::config(format!("{path}[{j}]"), "entry is not finite"));
    }
    Ok(out)
}
