use std::fmt;

use crate::model::Allocation;

/// The coverage constraint an allocation violated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constraint {
    /// `0 <= x1_a <= m_a`
    DedicatedA,
    /// `0 <= x1_ab + x2_ab <= m_ab`
    Overlap,
    /// `0 <= x2_b <= m_b`
    DedicatedB,
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::DedicatedA => write!(f, "(1) 0 <= x1_a <= m_a"),
            Constraint::Overlap => write!(f, "(2) 0 <= x1_ab + x2_ab <= m_ab"),
            Constraint::DedicatedB => write!(f, "(3) 0 <= x2_b <= m_b"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("infeasible allocation: constraint {constraint} violated ({detail})")]
    Infeasible {
        constraint: Constraint,
        detail: String,
    },

    #[error("invalid market configuration: {0}")]
    Config(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error("solver failed after {iterations} iterations ({reason}); residual {residual:e}")]
    Solver {
        reason: String,
        last: Allocation,
        residual: f64,
        iterations: usize,
    },

    #[error("sweep aborted at W = {w}: {source}")]
    SweepRow {
        w: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid field `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for this error: 2 for solver failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Solver { .. } => 2,
            Error::SweepRow { source, .. } => source.exit_code(),
            _ => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
