use thiserror::Error;

use crate::optimizer::SolveReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("non-finite sample at x = {x}")]
    NonFiniteSample { x: f64 },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("potential is not differentiable at s = {0}")]
    NonDifferentiable(f64),
    #[error("invalid potential: {0}")]
    InvalidPotential(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("objective is not finite at the initial field")]
    NonFiniteInitial,
    #[error("solver did not converge: {reason}")]
    NotConverged {
        reason: String,
        report: Box<SolveReport>,
    },
    #[error("degenerate quotient: every start collapsed to a vanishing denominator")]
    Degenerate,
    #[error("zero denominator in {0}")]
    ZeroDenominator(&'static str),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
