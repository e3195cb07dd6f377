use thiserror::Error;

use crate::solver::SolveResult;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("graph must have at least one vertex")]
    EmptyGraph,

    /// A per-vertex or per-edge value violates an invariant.
    #[error("invalid {field}[{index}]: {reason}")]
    InvalidEntry {
        field: &'static str,
        index: usize,
        reason: String,
    },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("alpha < p (alpha = {alpha}, p = {p})")]
    AlphaBelowP { p: f64, alpha: f64 },

    #[error("graph is not connected")]
    Disconnected,

    #[error("length mismatch for {what}: expected {expected}, found {found}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    /// Argument outside the domain where the formula is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("solver did not converge on any restart (best relative residual {:.3e})", .0.residual_rel)]
    NotConverged(Box<SolveResult>),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl Error {
    pub(crate) fn entry(field: &'static str, index: usize, reason: impl Into<String>) -> Self {
        Error::InvalidEntry {
            field,
            index,
            reason: reason.into(),
        }
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
