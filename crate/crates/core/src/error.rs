use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Arguments outside the documented domain of an operation.
    #[error("input-domain error: {0}")]
    InputDomain(String),

    /// The problem is well posed but has no solution (e.g. an inadmissible
    /// rotation ratio).
    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("non-convergence: {0}")]
    NonConvergence(String),

    #[error("numeric failure: {0}")]
    NumericFailure(String),

    #[error("no reflection axis found (best symmetry residual {residual:e})")]
    SymmetryNotFound { residual: f64 },

    #[error("degenerate radius {value:e} at grid point ({i}, {j})")]
    DegenerateRadius { i: usize, j: usize, value: f64 },

    #[error("jet is not isothermal (defect {defect:e})")]
    NotIsothermal { defect: f64 },

    #[error("not a self-shrinker: residual {residual:e} exceeds {tol:e}")]
    NotAShrinker { residual: f64, tol: f64 },

    #[error("embedded factor curve is not the unit circle (c_gamma = {c_gamma})")]
    EmbeddedNonCircle { c_gamma: f64 },

    #[error("flow step failed at tau = {tau}: {source}")]
    FlowFailure {
        tau: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("unknown {family} '{name}' (known: {known})")]
    UnknownStrategy {
        family: &'static str,
        name: String,
        known: String,
    },

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::InputDomain(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::NumericFailure(msg.into())
    }

    /// True for errors caused by the caller's input rather than by the
    /// numerics (argument validation, inadmissible parameters, bad files).
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::InputDomain(_)
            | Error::NoSolution(_)
            | Error::UnknownStrategy { .. }
            | Error::Format(_)
            | Error::Json(_)
            | Error::Io(_) => true,
            Error::FlowFailure { source, .. } => source.is_input_error(),
            _ => false,
        }
    }
}
