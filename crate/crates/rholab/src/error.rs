use thiserror::Error;

/// Errors surfaced by lattice geometry, quadrature and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cube outside lattice: {0}")]
    CubeOutsideLattice(String),

    #[error("empty cube family: {0}")]
    EmptyFamily(String),

    #[error("family does not cover lattice: {0}")]
    FamilyDoesNotCover(String),

    #[error("bracket exhausted: {0}")]
    BracketExhausted(String),

    #[error("degenerate potential on cube: {0}")]
    DegeneratePotential(String),

    #[error("lattice too coarse for rho: {0}")]
    LatticeTooCoarse(String),

    #[error("level below average: t = {t} must exceed weighted average {avg}")]
    LevelBelowAverage { t: f64, avg: f64 },

    #[error("insufficient margin: {0}")]
    InsufficientMargin(String),

    #[error("point outside cube: {0}")]
    PointOutsideCube(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("weight must be strictly positive: {0}")]
    NonPositiveWeight(String),

    #[error("non-finite sample: {0}")]
    NonFiniteSample(String),

    #[error("annulus under-resolved: {0}")]
    UnderResolved(String),

    #[error("divergent iteration: {0}")]
    DivergentIteration(String),

    #[error("hypothesis pre-check failed: {0}")]
    PrecheckFailed(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
