use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The unitary has an eigenvalue at -1, where the principal logarithm is undefined.
    #[error("eigenvalue {0:.3e} away from -1; principal logarithm undefined")]
    BranchPoint(f64),

    #[error(
        "no conjugation time found for pair ({conjugator}, {conjugated}) after {tried} candidates"
    )]
    ExhaustedCandidates {
        conjugator: usize,
        conjugated: usize,
        tried: usize,
    },

    #[error("element lies outside the dynamical Lie algebra (residual {0:.3e})")]
    ResidualTooLarge(f64),

    #[error(
        "Newton iteration did not converge (residual {residual:.3e} after {iterations} iterations)"
    )]
    NoConvergence { residual: f64, iterations: usize },

    #[error("no root order M up to {cap} gave a convergent neighborhood solve")]
    MNotFound { cap: u64 },

    #[error("target unreachable: {0}")]
    TargetUnreachable(String),

    #[error("Dirichlet search exceeded its budget of {cap} candidates")]
    SearchBudgetExceeded { cap: u64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
