use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failure modes shared by every analysis module.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("quadrature did not converge after {evals} evaluations: estimate {estimate:e}, error bound {error_bound:e}")]
    QuadratureNonConvergence {
        estimate: f64,
        error_bound: f64,
        evals: usize,
    },

    /// The pushforward `w'X + b` collapsed to a point mass at `location`.
    #[error("degenerate pushforward: zero scale, point mass at {location}")]
    DegenerateScale { location: f64 },

    #[error("ill-conditioned rank-2 gram: c^2/(ab) = {ratio} is too close to 1 (vectors nearly parallel)")]
    IllConditioned { ratio: f64 },

    #[error("right-hand side is not in the range of the singular matrix (relative residual {residual:e})")]
    Inconsistent { residual: f64 },

    #[error("matrix is not positive semi-definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    /// Robust KKT solution is `v = 0`; `2ε ∂‖0‖_q ∋ θ̄` holds because `‖θ̄‖_{q*} ≤ 2ε`.
    #[error("degenerate classifier: zero solution certified (‖θ̄‖ dual = {dual_norm} ≤ 2ε = {two_eps})")]
    DegenerateClassifier { dual_norm: f64, two_eps: f64 },

    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        best: Vec<f64>,
    },

    #[error("training diverged at epoch {epoch}")]
    Diverged { epoch: usize, trace: Vec<f64> },

    #[error("class {label} has no samples")]
    EmptyClass { label: i8 },

    #[error("domain error: {0}")]
    Domain(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
