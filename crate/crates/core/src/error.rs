use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("subspace dimension {dim} out of range for ambient dimension {ambient}")]
    DimensionOutOfRange { dim: usize, ambient: usize },

    #[error("vectors are linearly dependent over F2")]
    LinearlyDependent,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("period matrix is not symmetric (max asymmetry {0:.3e})")]
    NotSymmetric(f64),

    #[error("imaginary part is not positive definite (smallest eigenvalue {0:.3e})")]
    NotPositiveDefinite(f64),

    #[error("imaginary part too close to degenerate (smallest eigenvalue {found:.3e} < floor {floor:.3e})")]
    NearDegenerate { found: f64, floor: f64 },

    #[error("truncation radius cap {max_radius} reached with tail bound {achieved:.3e} > target {target:.3e}")]
    RadiusCapExceeded {
        max_radius: usize,
        achieved: f64,
        target: f64,
    },

    #[error("lattice enumeration cost cap exceeded: {0}")]
    CostCapExceeded(String),

    #[error("unsupported by design: {0}")]
    Unsupported(String),

    #[error("elimination stuck at S_{index}: no admissible relation on {domain}")]
    EliminationStuck { index: usize, domain: String },

    #[error("proportionality failure at genus {g}: 2*alpha = {lhs}, beta*(1-2^g) = {rhs}")]
    ProportionalityFailure { g: usize, lhs: String, rhs: String },

    #[error("non-convergence: {0}")]
    NonConvergence(String),

    #[error("ill-conditioned: {0}")]
    IllConditioned(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
