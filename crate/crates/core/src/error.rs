use thiserror::Error;

/// Errors raised by the monotonicity checks, the quadrature layer and the
/// scenario runner.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("a Bernstein mixture needs at least one atom")]
    EmptyMixture,

    #[error("unknown name `{0}`")]
    UnknownName(String),

    #[error("bad parameter: {0}")]
    BadParam(String),

    /// A quadrature-backed evaluation did not converge.
    #[error("evaluation failed: {0}")]
    Evaluation(String),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
}

impl Error {
    /// Prefix the message with extra context (point, u value, ...).
    pub fn context(self, ctx: impl std::fmt::Display) -> Self {
        match self {
            Error::Domain(m) => Error::Domain(format!("{ctx}: {m}")),
            Error::NonFinite(m) => Error::NonFinite(format!("{ctx}: {m}")),
            Error::BadParam(m) => Error::BadParam(format!("{ctx}: {m}")),
            Error::Evaluation(m) => Error::Evaluation(format!("{ctx}: {m}")),
            other => other,
        }
    }

    /// True for failures caused by unconverged numerics rather than bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::Evaluation(_) | Error::NonFinite(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
