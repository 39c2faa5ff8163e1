use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("zero root cannot be used with the p(0) = 1 normalization")]
    ZeroRoot,

    #[error("{count} roots exceed the degree budget {budget}")]
    TooManyRoots { count: usize, budget: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("horizon T = {0} must be even")]
    OddHorizon(usize),

    #[error("point {re}{im:+}i lies strictly inside the region")]
    InsideRegion { re: f64, im: f64 },

    #[error("block {block} is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    NotConvexConcave {
        block: &'static str,
        min_eigenvalue: f64,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("instance construction failed after {attempts} attempts")]
    ConstructionFailed { attempts: usize },

    #[error("invalid spectral measure: {0}")]
    InvalidMeasure(String),

    #[error("polynomial violates the normalization: {0}")]
    NormalizationViolated(String),

    #[error("complex root {re}{im:+}i has no conjugate partner")]
    UnpairedRoot { re: f64, im: f64 },

    #[error("polynomial has non-real coefficients")]
    ComplexCoefficients,

    #[error("mesh would need {points} points at spacing {required_delta:e}; relax epsilon or raise the cap")]
    MeshTooLarge { points: usize, required_delta: f64 },

    #[error("mesh of {points} points is too small for degree {degree}")]
    MeshTooSmall { points: usize, degree: usize },

    #[error("degree {0} is too small for this quantity")]
    DegreeGuard(usize),

    #[error("linear algebra failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
