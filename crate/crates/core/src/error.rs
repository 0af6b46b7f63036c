use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Malformed or out-of-range input.
    InvalidInput(String),
    DimensionMismatch {
        expected: usize,
        found: usize,
    },
    /// Frame vectors are not orthonormal within tolerance.
    NonOrthonormalFrame {
        defect: f64,
    },
    /// The requested scheme or problem cannot be set up.
    Configuration(String),
    /// Grid would exceed the node budget.
    ResourceLimit {
        nodes: usize,
        budget: usize,
    },
    CflViolated {
        dt: f64,
        limit: f64,
    },
    NonConvergence {
        iterations: usize,
        residual: f64,
        detail: String,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::NonOrthonormalFrame { defect } => {
                write!(f, "frame is not orthonormal (defect {defect:e})")
            }
            Error::Configuration(msg) => write!(f, "configuration error: {msg}"),
            Error::ResourceLimit { nodes, budget } => {
                write!(f, "grid needs {nodes} nodes, budget is {budget}")
            }
            Error::CflViolated { dt, limit } => {
                write!(f, "time step {dt:e} exceeds the monotonicity limit {limit:e}")
            }
            Error::NonConvergence { iterations, residual, detail } => {
                write!(f, "no convergence after {iterations} iterations (residual {residual:e}): {detail}")
            }
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
