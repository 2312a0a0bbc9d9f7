use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("axis {axis} out of range for dimension {dim}")]
    AxisOutOfRange { axis: usize, dim: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("no vector fields to generate brackets from (r = 0 and max_depth = 0)")]
    EmptyGeneratingSet,
    #[error("operation requires polynomial coefficients")]
    NonPolynomial,
    #[error("state became non-finite")]
    Exploded,
    #[error("start point lies outside the closure of the domain")]
    StartOutsideClosure,
    #[error("point is not on the boundary of the domain")]
    NotOnBoundary,
    #[error("domain is unbounded")]
    UnboundedDomain,
    #[error("operation not supported for {0} domains")]
    UnsupportedShape(&'static str),
    #[error("all {n} paths were censored (censored fraction {censored_fraction})")]
    AllCensored { n: usize, censored_fraction: f64 },
    #[error(
        "no noise in the exterior normal direction: normal quadratic form \
         sum_ij (sigma sigma^T)_ij v_i v_j = {value} is not positive"
    )]
    NoNormalNoise { value: f64 },
    #[error("h = {h} is below the resolution guard {min} (10 time steps)")]
    BelowResolution { h: f64, min: f64 },
    #[error("grid resolution {n} too coarse (need at least 4 points per axis)")]
    GridTooCoarse { n: usize },
    #[error("stencil point {index} of grid point {point} lies outside the open domain")]
    StencilOutsideDomain { point: usize, index: usize },
    #[error("no completed cycles ({censored} censored)")]
    NoCompletedCycles { censored: usize },
    #[error("insufficient cycles: {available} available, {required} required")]
    InsufficientCycles { available: usize, required: usize },
    #[error("no sampled start point produced an uncensored exit")]
    NoUncensoredStarts,
}
