use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the kernel, channel constructors and the analyses built on them.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("Schur iteration did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("input contains non-finite entries")]
    NonFinite,

    #[error("eigenvalue {eigenvalue} lies within {guard:e} of the selection boundary")]
    BoundaryAmbiguity { eigenvalue: Complex64, guard: f64 },

    #[error("Sylvester equation is singular: diagonal blocks share an eigenvalue (separation {separation:e})")]
    SylvesterSingular { separation: f64 },

    #[error("matrix is not Hermitian (gap {gap:e})")]
    NotHermitian { gap: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("bad convex weights: {0}")]
    BadWeights(String),

    #[error("bad block partition: {0}")]
    BadPartition(String),

    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),

    #[error("bad parameters: {0}")]
    BadParams(String),

    #[error("invalid tolerance configuration: {0}")]
    InvalidTolerance(String),

    #[error("map is not unital (gap {gap:e}); classification requires a UCP map")]
    NotUnital { gap: f64 },

    #[error("{eigenvalue} is not an eigenvalue of the superoperator")]
    NotAnEigenvalue { eigenvalue: Complex64 },

    #[error("no spectral gap: transient radius {transient_radius} is too close to the unit circle")]
    NoSpectralGap { transient_radius: f64 },

    #[error("matrix is not in the peripheral space (residual {residual:e})")]
    NotPeripheral { residual: f64 },

    #[error("no power k <= {k_max} brings every peripheral eigenvalue within the tolerance of 1 (best k = {best_k}, defect {best_defect:e})")]
    SubsequenceNotFound {
        k_max: usize,
        best_k: usize,
        best_defect: f64,
    },

    #[error("not a state: {0}")]
    NotAState(String),

    #[error("not an orthogonal projection (gap {gap:e})")]
    NotAProjection { gap: f64 },

    #[error("channel is not stationary")]
    NotStationary,

    #[error("block splitting stalled after {draws} random draws")]
    DegenerateDraws { draws: usize },

    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
