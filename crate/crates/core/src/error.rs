use thiserror::Error;

/// Errors raised by the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graphon: {0}")]
    InvalidGraphon(String),

    #[error("invalid interaction matrix: {0}")]
    InvalidInteraction(String),

    #[error("common refinement needs {required} blocks, cap is {cap}")]
    ResolutionCap { required: usize, cap: usize },

    #[error("exhaustive cut norm supports at most {max} blocks, got {blocks}")]
    CutNormTooLarge { blocks: usize, max: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("domain mismatch: {0}")]
    DomainMismatch(String),

    #[error("covariance is not symmetric positive definite")]
    NotPositiveDefinite,

    #[error("ill-conditioned covariance (condition number {0:e})")]
    IllConditioned(f64),

    #[error("subset is empty")]
    EmptySubset,

    #[error("index {index} out of range for {len} particles")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("time step {dt:e} exceeds stability bound {bound:e}")]
    UnstableStep { dt: f64, bound: f64 },

    #[error("negative mass {value:e} at cell {cell}")]
    NegativeMass { cell: usize, value: f64 },

    #[error("support violation at cell {0}: p > 0 where q is below the floor")]
    SupportViolation(usize),

    #[error("density below floor at cell {0}")]
    BelowFloor(usize),

    #[error("need at least {min} samples, got {got}")]
    TooFewSamples { got: usize, min: usize },

    #[error("simulation diverged at step {step} (|x| = {value:e})")]
    Divergence { step: usize, value: f64 },

    #[error("{n} particles exceeds the subset lattice cap of {cap}")]
    SubsetCap { n: usize, cap: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
