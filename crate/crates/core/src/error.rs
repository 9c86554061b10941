use thiserror::Error;

use crate::distance::CaseLabel;
use crate::lorentz::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite matrix entry c{}{}", .index / 3 + 1, .index % 3 + 1)]
    NonFinite { index: usize },

    #[error("matrix is not an element of SO0(2,1): {0}")]
    Invalid(ValidationReport),

    #[error("product drifted off the group (residual {residual:.3e} > {tol:.3e})")]
    NumericDrift { residual: f64, tol: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("parameters (beta, t) inconsistent with matrix: n(beta, t) = {expected}, c11 - 1 = {actual}")]
    ParameterMismatch { expected: f64, actual: f64 },

    #[error("solver failure in {case:?}: {reason}")]
    SolverFailure {
        case: CaseLabel,
        reason: String,
        /// Sampled `(beta, residual)` pairs from the bracket scan.
        profile: Vec<(f64, f64)>,
    },

    #[error("no cut point for beta = {beta} below scan horizon t = {horizon} (last c22 + c33 = {last_trace:.3e})")]
    Horizon { beta: f64, horizon: f64, last_trace: f64 },

    #[error("parse error at {position}: {message}")]
    Parse { position: usize, message: String },
}

impl Error {
    /// True for failures of the numerical machinery rather than of the input.
    pub fn is_solver_failure(&self) -> bool {
        matches!(self, Error::SolverFailure { .. } | Error::Horizon { .. })
    }
}
