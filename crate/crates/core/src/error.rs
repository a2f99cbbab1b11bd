use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumericsError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("malformed rational `{0}` (expected int, int/int or decimal)")]
    Parse(String),
    #[error("exponent {0} out of supported range")]
    ExponentOverflow(i64),
    #[error("matrix is not square ({rows} rows, row of length {len})")]
    NotSquare { rows: usize, len: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LatticeError {
    #[error("zero denominator at site n={0}")]
    ZeroDenominator(i64),
    #[error("window is empty (n_hi < n_lo)")]
    WindowTooSmall,
    #[error("boundary value y at n_lo must be 1, found {0}")]
    BoundaryNotOne(String),
    #[error("field value x or y is zero at site n={0}")]
    ZeroField(i64),
    #[error("parameter must lie in (0, 1): {name} = {value}")]
    ParamOutOfRange { name: &'static str, value: String },
    #[error("parameter must be positive: {0}")]
    NonPositiveParameter(&'static str),
    #[error("row lengths disagree with the window")]
    ShapeMismatch,
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolitonError {
    #[error("alpha + beta must exceed 1 for an admissible p interval")]
    InvalidInterval,
    #[error("soliton {0}: p outside (0, alpha+beta-1)")]
    POutOfRange(usize),
    #[error("soliton {0}: gamma * (p - (alpha+beta-1)/2) must be positive")]
    GammaSignCondition(usize),
    #[error("soliton {0}: p equals the midpoint (alpha+beta-1)/2")]
    DegenerateP(usize),
    #[error("solitons {0} and {1}: p_i + p_j + Delta vanishes")]
    DenominatorClash(usize, usize),
    #[error("solitons {0} and {1} share the same p")]
    DuplicateP(usize, usize),
    #[error("tau function vanishes near (t={0}, n={1})")]
    ZeroTau(i64, i64),
    #[error("KP parameters violate the reduction constraint p_i + q_i = a1 + a2 (index {0})")]
    ConstraintViolated(usize),
    #[error("KP parameters are not pairwise distinct or produce a zero denominator")]
    KpDegenerate,
    #[error("grid size must be at least 3, got {0}")]
    GridTooSmall(usize),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoxBallError {
    #[error("box {site} holds {value} balls, outside [0, {capacity}]")]
    CapacityViolation { site: usize, value: i64, capacity: u32 },
    #[error("capacity must be positive")]
    ZeroCapacity,
    #[error("epsilon must be positive, got {0}")]
    NonPositiveEpsilon(f64),
    #[error("ultradiscrete parameters A and B must be positive")]
    NonPositiveParameter,
    #[error("parameter must lie in (0, 1): {0}")]
    ParamOutOfRange(String),
    #[error("X and Y fields differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeasureError {
    #[error("field has no rows or no sites")]
    EmptyField,
    #[error("track has {0} usable samples, need at least 2")]
    TooFewSamples(usize),
    #[error("history mixes box capacities")]
    InconsistentCapacities,
    #[error("overtake report needs exactly two tracks, got {0}")]
    WrongTrackCount(usize),
}
