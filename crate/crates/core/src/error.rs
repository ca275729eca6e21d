use thiserror::Error;

/// Errors raised by weight construction, discretization, solvers and analyses.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum WallError {
    #[error("weight value {value} at segment {index} is not positive")]
    NonPositiveValue { index: usize, value: f64 },
    #[error("breakpoints are not strictly increasing at index {index}")]
    UnsortedBreakpoints { index: usize },
    #[error("expected {expected} segment values, got {got}")]
    SegmentCountMismatch { expected: usize, got: usize },
    #[error("domain too small: {0}")]
    DomainTooSmall(String),
    #[error("invalid grid parameters: {0}")]
    InvalidGrid(String),
    #[error("invalid solver options: {0}")]
    InvalidOptions(String),
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("converged profile is not non-decreasing at node {node}")]
    MonotonicityViolation { node: usize },
    #[error("profile is not a converged wall (EL residual {residual:e})")]
    ProfileNotConverged { residual: f64 },
    #[error("eigen solver did not converge (residual {residual:e})")]
    EigenNoConvergence { residual: f64 },
    #[error("weight function psi is not positive at node {node}")]
    NonPositivePsi { node: usize },
    #[error("perturbation is not tangential at node {node} (v.m = {dot:e})")]
    NotTangential { node: usize, dot: f64 },
    #[error("no sign change found while bracketing root of {0}")]
    NoSignChange(String),
    #[error("quadrature failed: {0}")]
    Quadrature(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

pub type Result<T, E = WallError> = std::result::Result<T, E>;
