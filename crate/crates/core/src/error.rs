//! Error type shared by every module of the crate.

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error in `{field}`: {reason}")]
    Domain { field: &'static str, reason: String },

    /// The rule is undefined at the supplied observation (e.g. James–Stein at y = 0).
    #[error("singular input: {0}")]
    SingularInput(String),

    /// An iterative method ran out of terms or panels before meeting its tolerance.
    #[error("{method} did not converge after {iterations} iterations")]
    Convergence { method: &'static str, iterations: usize },

    /// A shrink-factor evaluation failed at a grid point.
    #[error("evaluation of `{estimator}` failed at T = {t:e}: {source}")]
    GridEvaluation {
        estimator: String,
        t: f64,
        #[source]
        source: Box<Error>,
    },

    /// A Monte Carlo replicate failed.
    #[error("replicate {replicate} of `{estimator}` at |theta| = {theta_norm} failed: {source}")]
    Replicate {
        estimator: String,
        theta_norm: f64,
        replicate: u64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn domain(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            field,
            reason: reason.into(),
        }
    }
}
