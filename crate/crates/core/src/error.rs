use thiserror::Error;

use crate::newton::NewtonFailure;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("geometry: {0}")]
    Geometry(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("solver: {0}")]
    Solver(String),

    /// The `(ℓ+1)×(ℓ+1)` system for `m_j, log τ` is nonsingular for exact
    /// data, so a tiny pivot points at a broken discretization upstream.
    #[error(
        "parameter system is numerically singular (pivot {pivot:.3e} vs norm {norm:.3e}); \
         the exact system is always nonsingular, so the integral equation solves are unreliable"
    )]
    SingularParameterSystem { pivot: f64, norm: f64 },

    #[error("singular logarithm: {0}")]
    SingularLog(String),

    #[error("newton: {0}")]
    Newton(String),

    #[error("newton did not converge after {} iterations (last step {:.3e})",
        .0.state.k, .0.state.step_norm_history.last().copied().unwrap_or(f64::NAN))]
    NewtonNotConverged(Box<NewtonFailure>),

    #[error("oracle: {0}")]
    Oracle(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn at(stage: &'static str) -> impl FnOnce(Error) -> Error {
        move |source| Error::Stage {
            stage,
            source: Box::new(source),
        }
    }

    /// Innermost error, skipping stage wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}
