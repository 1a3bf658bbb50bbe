use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite coordinate in point")]
    NonFinite,

    #[error("invalid world-function spec: {0}")]
    InvalidSpec(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("vector with squared length {0} is spacelike; parallelism is undefined")]
    SpacelikeUnsupported(f64),

    #[error("timelike premise violated: {0}")]
    NonTimelike(String),

    #[error("no closed-form equivalence family for this configuration: {0}")]
    NoClosedForm(String),

    #[error("no solution found from {starts} starts (best residual {best_residual:e})")]
    NoSolutionFound { starts: usize, best_residual: f64 },

    #[error("negative world function {0:e}: envelope square root undefined")]
    NegativeSigma(f64),

    #[error("degenerate tube: mu = {mu} must exceed sqrt(2) * lambda0 = {bound}")]
    DegenerateTube { mu: f64, bound: f64 },

    #[error("degenerate link: mu = {mu} must exceed sqrt(2) * lambda0 = {bound}")]
    DegenerateLink { mu: f64, bound: f64 },

    #[error("links are not equivalent")]
    NotEquivalent,

    #[error("object kinds differ: {0} vs {1}")]
    KindMismatch(String, String),

    #[error("time step {dt:e} exceeds the stability bound {bound:e}")]
    CflViolation { dt: f64, bound: f64 },
}
