use thiserror::Error;

/// Errors raised by the solvers and analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("m = {m} out of range 1..={max}")]
    MOutOfRange { m: usize, max: usize },
    #[error("theta must be > 1 here, got {0}")]
    ThetaNotAboveOne(f64),
    #[error("no sign change on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("root isolation did not converge: {0}")]
    IsolationFailed(String),
    #[error("eliminated polynomial has degree {0}, expected 4")]
    EliminationDegree(usize),
    #[error("row swap requested on a swap-invariant solution")]
    SwapOnSymmetric,
    #[error("solution branch absent at theta = {0}")]
    BranchAbsent(f64),
    #[error("eigenvalue computation failed: {0}")]
    Eigen(String),
    #[error("output error: {0}")]
    Output(String),
}

pub type Result<T> = std::result::Result<T, Error>;
