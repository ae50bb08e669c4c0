use thiserror::Error;

/// Failures raised by operators, models and the time loop.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("field grids do not match")]
    GridMismatch,

    #[error("non-vanishing depth condition violated: {condition} reaches {min:.3e} at node {node}")]
    Depth {
        condition: &'static str,
        min: f64,
        node: usize,
    },

    #[error("ellipticity condition violated: {condition} reaches {min:.3e} at node {node}")]
    Ellipticity {
        condition: &'static str,
        min: f64,
        node: usize,
    },

    #[error("shallow-water hyperbolicity lost: margin {margin:.3e} at node {node}")]
    Hyperbolicity { margin: f64, node: usize },

    #[error("contraction condition |xi|_inf < 1 violated: |xi|_inf = {xi_max:.6}")]
    Contraction { xi_max: f64 },

    #[error("mass operator not positive: {condition} reaches {min:.3e}")]
    MassIndefinite { condition: &'static str, min: f64 },

    #[error("{solver} did not converge in {iterations} iterations (relative residual {residual:.3e})")]
    IterationLimit {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("inadmissible coefficient set: {0}")]
    Inadmissible(String),

    #[error("model {model} expects {expected}")]
    WrongState { model: &'static str, expected: &'static str },

    #[error("non-finite values at t = {t}")]
    NonFinite { t: f64 },

    #[error("admissibility lost at t = {t}: {source}")]
    AdmissibilityLost {
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("sweep point mu = {mu}: {source}")]
    AtSweepPoint {
        mu: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    /// True for the conditions that describe loss of admissibility of a state
    /// (as opposed to solver breakdown or bad input).
    pub fn is_admissibility(&self) -> bool {
        match self {
            Error::Depth { .. }
            | Error::Ellipticity { .. }
            | Error::Hyperbolicity { .. }
            | Error::Contraction { .. }
            | Error::MassIndefinite { .. } => true,
            Error::AdmissibilityLost { .. } => true,
            Error::AtSweepPoint { source, .. } => source.is_admissibility(),
            _ => false,
        }
    }

    /// Name of the violated condition, when the error is an admissibility failure.
    pub fn condition(&self) -> Option<&'static str> {
        match self {
            Error::Depth { condition, .. }
            | Error::Ellipticity { condition, .. }
            | Error::MassIndefinite { condition, .. } => Some(condition),
            Error::Hyperbolicity { .. } => Some("shallow-water hyperbolicity margin"),
            Error::Contraction { .. } => Some("|xi|_inf < 1"),
            Error::AdmissibilityLost { source, .. } | Error::AtSweepPoint { source, .. } => source.condition(),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
