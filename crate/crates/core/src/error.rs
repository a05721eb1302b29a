use thiserror::Error;

/// Errors surfaced by the library.
///
/// `Parse` and `Validation` are input problems; the rest mark a caller
/// asking for something the inputs cannot support.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid instance: {0}")]
    Validation(String),

    #[error("infeasible allocation: {0}")]
    InfeasibleAllocation(String),

    #[error("algorithm `{algo}` does not accept {kind} instances")]
    UnsupportedKind { algo: &'static str, kind: &'static str },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("bisection did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("random tape mismatch: {0}")]
    TapeMismatch(String),

    #[error("builder `{builder}` is not compatible with algorithm `{algo}`")]
    IncompatibleBuilder { builder: String, algo: String },

    #[error("Monte Carlo builder requires trials >= 1")]
    ZeroTrials,

    #[error("{items} items give {items}! orders, above the enumeration limit of {limit} items")]
    PermutationOverflow { items: usize, limit: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("lp solver: {0}")]
    Solver(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
