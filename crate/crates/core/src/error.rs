use thiserror::Error;

use crate::metric_space::Surface;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("surface mismatch: expected {expected:?}, got {found:?}")]
    SurfaceMismatch { expected: Surface, found: Surface },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("map has no lift to the plane")]
    NoLift,

    #[error("lift holonomy is not integral (residual {residual:.3e})")]
    NonIntegerHolonomy { residual: f64 },

    #[error("translation vector requires identity homology, got {matrix:?}")]
    NonTrivialHomology { matrix: [[i64; 2]; 2] },

    #[error("circle map is not a monotone degree-one lift (defect {defect:.3e})")]
    NotDegreeOne { defect: f64 },

    #[error("orbit left the numeric range of the chart at step {step}")]
    DivergenceToPole { step: usize },

    #[error("not found within {limit} steps")]
    NotFound { limit: usize },

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("union of disc iterates not stationary after {iterations} iterations (last change {last_change:.3e})")]
    NotStationary { iterations: usize, last_change: f64 },

    #[error("monotone chain stuck at level {level} with gap {gap:.3e}")]
    ChainStuck { level: usize, gap: f64 },

    #[error("conjugacy residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    ResidualTooLarge { residual: f64, tolerance: f64 },

    #[error("alpha(0) - alpha(1/2) = {gap:.6} is neither 0 nor 1/2")]
    ContinuityGapAtHalf { gap: f64 },

    #[error("map does not commute with the covering involution (residual {residual:.3e})")]
    ThetaCommutationFailure { residual: f64 },

    #[error("composition depth {depth} exceeds the limit of {limit}")]
    CompositionTooDeep { depth: usize, limit: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition failed: {0}")]
    Precondition(String),
}
