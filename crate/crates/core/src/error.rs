use thiserror::Error;

use crate::expr::ParseDiagnostic;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseDiagnostic),

    #[error("unbound name `{0}`")]
    Unbound(String),

    #[error("`{primitive}` is not differentiable at {at}")]
    NonSmooth { primitive: &'static str, at: f64 },

    #[error("dimension mismatch: {what} has length {got}, expected {expected}")]
    Dimension {
        what: String,
        got: usize,
        expected: usize,
    },

    #[error("degenerate matrix: |det| = {det:e} below tolerance {tol:e}")]
    Degenerate { det: f64, tol: f64 },

    #[error("state is outside the admissible set: {0}")]
    Inadmissible(String),

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("operation requires a metric system")]
    NotMetric,

    #[error("CFL condition violated: dt = {dt} exceeds {limit}")]
    Cfl { dt: f64, limit: f64 },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("forbidden region: radicand negative on [{from}, {to}]")]
    Forbidden { from: f64, to: f64 },

    #[error("unsupported jet order: `{0}`")]
    UnsupportedJet(String),

    #[error("invalid argument: {0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn dim(what: impl Into<String>, got: usize, expected: usize) -> Self {
        Error::Dimension {
            what: what.into(),
            got,
            expected,
        }
    }
}
