use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("need at least {min} points, got {got}")]
    TooFewPoints { min: usize, got: usize },

    #[error("point set is empty")]
    EmptyPointSet,

    #[error("points {first} and {second} coincide")]
    DuplicatePoints { first: usize, second: usize },

    #[error("argument {name} = {value} out of range: {reason}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("quadrature order R = {0} must be even and positive")]
    BadQuadratureOrder(usize),

    #[error("contour constraint violated: {0}")]
    Contour(String),

    #[error("z = {re} + {im}i lies on the branch cut (-inf, 0]")]
    BranchCut { re: f64, im: f64 },

    #[error("unknown kernel {0:?}, expected \"wendland2\" or \"wendland3\"")]
    UnknownKernel(String),

    #[error("mass matrix is not positive definite (duplicate centers or quadrature too coarse)")]
    MassNotPositiveDefinite,

    #[error(
        "factorization of zB + S broke down at z = {re} + {im}i (pivot ratio {pivot_ratio:e})"
    )]
    Factorization { re: f64, im: f64, pivot_ratio: f64 },

    #[error("generalized eigenproblem failed: {0}")]
    Eigen(&'static str),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
