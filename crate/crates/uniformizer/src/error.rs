use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point {0} lies outside the open unit disc")]
    OutsideDisc(String),
    #[error("derivative has a pole: |cz + d| = {0:e}")]
    DerivativePole(f64),
    #[error("first derivative vanishes at {0}")]
    DerivativeVanishes(String),
    #[error("contour sampling failed at {0}")]
    ContourEscape(String),
    #[error("branch of the power is undefined for exponent {0} without branch data")]
    BranchUndefined(f64),
    #[error("branch continuation conflict: relative mismatch {0:e}")]
    BranchConflict(f64),
    #[error("trace identity has no real solution (discriminant {0:e})")]
    NoRealSolution(f64),
    #[error("degenerate trace parameters: {0}")]
    Degenerate(String),
    #[error("invalid group: {0}")]
    InvalidGroup(String),
    #[error("relation product is not ±I (distance {0:e})")]
    RelationNotSatisfied(f64),
    #[error("invalid word: {0}")]
    InvalidWord(String),
    #[error("element budget of {0} exceeded")]
    ElementBudget(usize),
    #[error("expected a hyperbolic element, got {0}")]
    NotHyperbolic(String),
    #[error("parameter out of range: {0}")]
    Domain(String),
    #[error("factor is not an s-factor for s = {0}")]
    NotSFactor(f64),
    #[error("factors belong to different groups")]
    GroupMismatch,
    #[error("unstable surface type (g, n) = ({0}, {1})")]
    Unstable(u32, u32),
    #[error("truncated sum has not converged: {0}")]
    Unconverged(String),
    #[error("dimension is not a nonnegative integer: {0}")]
    NonIntegralDimension(f64),
    #[error("degree {deg} is outside the topological range for genus {genus}")]
    OutsideTopologicalRange { deg: i64, genus: u32 },
    #[error("invalid pinch plan: {0}")]
    InvalidPlan(String),
    #[error("empty quadrature domain")]
    EmptyDomain,
    #[error("non-integer s = {0} not supported here")]
    NonIntegerS(f64),
    #[error("c_s has a pole at s = 1")]
    Pole,
}

pub type Result<T> = std::result::Result<T, Error>;
