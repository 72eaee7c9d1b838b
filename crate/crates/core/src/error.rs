use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("singular jet: {0}")]
    SingularJet(String),

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("numeric overflow: {0}")]
    NumericOverflow(String),

    #[error("fundamental tensor is not positive definite: {0}")]
    NonPositiveDefinite(String),

    /// The Berwald frame normalization broke down at `theta`.
    #[error("degenerate frame at theta = {theta}: {detail}")]
    DegenerateFrame { theta: f64, detail: String },

    #[error("unsupported family for this operation: {0}")]
    UnsupportedFamily(String),

    #[error("singular p/q split: {0}")]
    SingularSplit(String),

    #[error("mean Cartan torsion vanishes (Riemannian flag): {0}")]
    RiemannianFlag(String),

    #[error("singular ODE coefficient: {0}")]
    SingularOde(String),

    #[error("quadrature did not converge: {0}")]
    QuadratureFailure(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::DomainError(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
