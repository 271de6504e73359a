use thiserror::Error;

/// Errors produced by map evaluation, quadrature, and functional assembly.
#[derive(Debug, Clone, Error)]
pub enum CknError {
    /// The map, its differential, and the eigen formulas are undefined at the origin.
    #[error("point at the origin: the map differential is not defined there")]
    ZeroPoint,

    #[error("alpha must be greater than -1, got {0}")]
    InvalidAlpha(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported parameters: {0}")]
    UnsupportedParameters(String),

    #[error("degenerate field: {0}")]
    DegenerateField(String),

    #[error("numerical non-convergence: {0}")]
    NonConvergence(String),

    /// A field evaluator returned a non-finite value at a quadrature node.
    #[error("non-finite field value {value} at node {point:?}")]
    Evaluation { point: Vec<f64>, value: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("gradient validation failed: max relative error {max_err:.3e} exceeds {tol:.1e} at {point:?}")]
    GradientMismatch {
        point: Vec<f64>,
        max_err: f64,
        tol: f64,
    },
}

pub type Result<T> = std::result::Result<T, CknError>;
