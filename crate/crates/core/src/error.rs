use thiserror::Error;

/// Failures raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid range: x_lo = {lo} must be below x_hi = {hi}")]
    InvalidRange { lo: f64, hi: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("grid mismatch: operands live on different grids")]
    GridMismatch,
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("empty window [{lo}, {hi}]: no grid node inside")]
    EmptyWindow { lo: f64, hi: f64 },
    #[error("under-resolved window [{lo}, {hi}]: {nodes} nodes, need at least 8")]
    UnderResolved { lo: f64, hi: f64, nodes: usize },
    #[error("non-finite value at node {0}")]
    NonFinite(usize),
    #[error("negative radicand {0:e} in the Q-norm: semibound constant c is violated")]
    NegativeRadicand(f64),
    #[error("reference function is not positive at node {0}")]
    NonPositive(usize),
    #[error("shifted operator is not positive definite ({negative} negative pivots)")]
    NotPositiveDefinite { negative: usize },
    #[error("solution overflow near x = {0}")]
    Overflow(f64),
    #[error("minimal-growth solution changes sign near x = {0}: lambda lies above the bottom of the spectrum")]
    SignChange(f64),
    #[error("critical operator: Wronskian {0:e} too small, no Green function exists")]
    CriticalOperator(f64),
    #[error("Evans potential reaches only {0} on the modeled range; divergence too slow")]
    DivergenceTooSlow(f64),
    #[error("level {level} lies outside the Evans potential range [{lo}, {hi}]")]
    OutOfRange { level: f64, lo: f64, hi: f64 },
    #[error("schedule violates {condition} at n = {n}")]
    ScheduleViolation { condition: &'static str, n: usize },
    #[error("range exhausted: only {feasible} cut-off pairs fit")]
    RangeExhausted { feasible: usize },
    #[error("sequence too short: {0} entries, need at least 8")]
    TooShort(usize),
    #[error("integration-by-parts identity violated at n = {n}: defect {defect:e} vs scale {scale:e}")]
    IdentityViolation { n: usize, defect: f64, scale: f64 },
    #[error("test function touches the base region")]
    SupportViolation,
}

pub type Result<T> = std::result::Result<T, Error>;
