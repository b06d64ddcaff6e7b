use crate::mesh::MapState;
use crate::target::Point;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("point does not belong to the target space: {0}")]
    SpaceMismatch(String),

    #[error("invalid target space: {0}")]
    InvalidSpace(String),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("maps are not comparable: {0}")]
    MapMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("barycenter did not converge after {iterations} iterations (last move {residual:e})")]
    BarycenterNotConverged {
        last: Box<Point>,
        residual: f64,
        iterations: usize,
    },

    #[error("linear solve did not converge after {iterations} iterations (residual {residual:e})")]
    LinearSolve { residual: f64, iterations: usize },

    #[error("resolvent exceeded {max_sweeps} sweeps (last displacement {displacement:e})")]
    SweepCap {
        last: Box<MapState>,
        displacement: f64,
        max_sweeps: usize,
    },

    #[error("resolvent step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// True for failures of an iterative numerical method (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::BarycenterNotConverged { .. }
            | Error::LinearSolve { .. }
            | Error::SweepCap { .. } => true,
            Error::Step { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
