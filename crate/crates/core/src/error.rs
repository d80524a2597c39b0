use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("network failed validation with {} issue(s): {}", .0.len(), summarize(.0))]
    Validation(Vec<crate::network::Issue>),

    #[error("singular impedance block in `{0}`")]
    SingularImpedance(String),

    #[error("unknown element `{0}`")]
    UnknownElement(String),

    #[error("power flow did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("singular Jacobian at iteration {iteration}")]
    SingularJacobian { iteration: usize },

    #[error("unsupported problem: {0}")]
    Unsupported(String),

    #[error("no start of the optimizer produced a usable point: {0}")]
    SolverBreakdown(String),

    #[error(
        "smooth derating surrogate disagrees with exact cost by {gap:.4e} (limit {limit:.4e})"
    )]
    SurrogateMismatch { gap: f64, limit: f64 },

    #[error("time step unstable: {0}")]
    Unstable(String),

    #[error("trace too short: need {needed} samples, have {have}")]
    TraceTooShort { needed: usize, have: usize },

    #[error("simulation did not reach steady state (relative drift {0:.3e})")]
    NotSteady(f64),

    #[error("demand data: {0}")]
    Demand(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn summarize(issues: &[crate::network::Issue]) -> String {
    issues
        .iter()
        .take(3)
        .map(|i| format!("{}({})", i.code.as_str(), i.element))
        .collect::<Vec<_>>()
        .join(", ")
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Stable machine-readable tag, used by the CLI error JSON and the C API.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::Validation(_) => "validation",
            Error::SingularImpedance(_) => "singular_impedance",
            Error::UnknownElement(_) => "unknown_element",
            Error::NonConvergence { .. } => "non_convergence",
            Error::SingularJacobian { .. } => "singular_jacobian",
            Error::Unsupported(_) => "unsupported",
            Error::SolverBreakdown(_) => "solver_breakdown",
            Error::SurrogateMismatch { .. } => "surrogate_mismatch",
            Error::Unstable(_) => "unstable",
            Error::TraceTooShort { .. } => "trace_too_short",
            Error::NotSteady(_) => "not_steady",
            Error::Demand(_) => "demand",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
            Error::Io(_) => "io",
        }
    }

    /// True for failures of a numerical solver, as opposed to bad input.
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. }
                | Error::SingularJacobian { .. }
                | Error::SolverBreakdown(_)
                | Error::SurrogateMismatch { .. }
                | Error::Unstable(_)
                | Error::NotSteady(_)
        )
    }
}
