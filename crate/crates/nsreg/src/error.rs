use thiserror::Error;

/// Errors surfaced by oracles, proximal operators, and solvers.
///
/// Solver *outcomes* (hit the iteration cap, stalled) are reported through
/// [`SolveStatus`](crate::SolveStatus), not through this type; an `Error`
/// means a contract was violated or a computation could not be completed
/// at all.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("contract violation: {0}")]
    Contract(String),

    /// A constrained proximal subproblem has an empty feasible set, e.g. a
    /// cardinality bound that cannot be met inside the current box.
    #[error("proximal subproblem infeasible: {0}")]
    ProxInfeasible(String),

    /// The scalar root solve behind the Euclidean-ball operator failed to
    /// bracket or localize its root; returning an infeasible step silently
    /// is not an option.
    #[error("root bracketing failed: {0}")]
    RootBracket(String),

    /// The ODE state left the finite range during integration.
    #[error("integration failure: {0}")]
    Integration(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
        if expected == got {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, got })
        }
    }
}
