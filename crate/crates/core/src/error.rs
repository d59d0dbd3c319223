use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unsupported root system: {0}")]
    UnsupportedKind(String),
    #[error("weight {0} is not dominant")]
    NotDominant(String),
    #[error("non-proper convolution: directions {0} do not lie in an open half-space")]
    NonProper(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("zero direction vector")]
    ZeroDirection,
    #[error("no ray factor parallel to {0}; derivative leaves the delta-Heaviside algebra")]
    NoParallelFactor(String),
    #[error("point {0} lies on a wall of the measure")]
    OnWall(String),
    #[error("measure has a singular part (term with fewer directions than the rank)")]
    SingularPart,
    #[error("chamber vector lies on a wall: {0}")]
    ChamberOnWall(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("cutoff too small: {0}")]
    CutoffTooSmall(String),
    #[error("insufficient dynamic range: {0}")]
    InsufficientRange(String),
    #[error("no model fits: {0}")]
    NoFit(String),
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
