use thiserror::Error;

/// Errors raised by the numerical toolkit.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("index {index} out of range for dimension {dim}")]
    IndexError { index: usize, dim: usize },

    #[error("singular resolvent at E = {energy}: degenerate states {ids:?}")]
    SingularResolvent { energy: f64, ids: Vec<usize> },

    #[error("quasi-degenerate projected resolvent: E = {energy}, E' = {e_prime} (route through the model-space contribution)")]
    QuasiDegenerate { energy: f64, e_prime: f64 },

    #[error("pole at {x0} is not strictly inside ({lower}, {upper})")]
    PoleOutsideGrid { x0: f64, lower: f64, upper: f64 },

    #[error("principal-value grid needs at least 4 nodes, got {nodes}")]
    InsufficientGrid { nodes: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("singularity at order {order} survives the counterterms (entry {row},{col})")]
    ResidualSingularity { order: usize, row: usize, col: usize },

    #[error("derivative of `{tag}` at E = {energy} disagrees with finite differences: deviation {deviation:e} > tolerance {tolerance:e}")]
    DerivativeInconsistent {
        tag: String,
        energy: f64,
        deviation: f64,
        tolerance: f64,
    },

    #[error("extrapolation failed: {0}")]
    ExtrapolationFailed(String),

    #[error("energy {energy} outside the domain [{lower}, {upper}] of `{tag}`")]
    DomainError {
        tag: String,
        energy: f64,
        lower: f64,
        upper: f64,
    },

    #[error("invalid term: {0}")]
    InvalidTerm(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Wraps the error with a location such as a diagram class or ladder position.
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Strips any [`Error::Context`] layers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) trait ResultExt<T> {
    fn context(self, context: impl FnOnce() -> String) -> Result<T>;
}

impl<T> ResultExt<T> for Result<T> {
    fn context(self, context: impl FnOnce() -> String) -> Result<T> {
        self.map_err(|e| e.context(context()))
    }
}
