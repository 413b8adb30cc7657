//! Error type shared by all modules of the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Structured rejection naming the violated precondition or invariant.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian: max |M - M\u{2020}| entry = {max_dev:.3e}")]
    NotHermitian { max_dev: f64 },

    #[error("operator is not positive semidefinite: min eigenvalue = {min_eigenvalue:.3e}")]
    NotPositive { min_eigenvalue: f64 },

    #[error("trace is {trace:.12}, expected 1")]
    TraceNotOne { trace: f64 },

    #[error("POVM elements do not sum to identity: max deviation = {max_dev:.3e}")]
    PovmIncomplete { max_dev: f64 },

    #[error("observable differs from the value-weighted POVM sum by {max_dev:.3e}")]
    NotUnbiased { max_dev: f64 },

    #[error("invalid probability {value}: must lie in {range}")]
    InvalidProbability { value: f64, range: &'static str },

    #[error("length mismatch: expected {expected} entries, got {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("pre- and post-selection are orthogonal: |Tr[rho_in rho_fin]| = {overlap:.3e}")]
    OrthogonalPrePostSelection { overlap: f64 },

    #[error("overlap estimate {estimate:.3e} does not exceed its error bound {bound:.3e}; ratio bound inapplicable")]
    OverlapTooSmall { estimate: f64, bound: f64 },

    #[error("SWAP overlap {value:.3e} is too close to zero")]
    ZeroSwapOverlap { value: f64 },

    #[error("functional is not a two-time state: reconstructed operator has min eigenvalue {min_eigenvalue:.3e}")]
    NotATwoTimeState { min_eigenvalue: f64 },

    #[error("negative probability {value:.3e} in outcome distribution")]
    NegativeProbability { value: f64 },

    #[error("outcome distribution sums to {sum:.12}, expected 1")]
    DistributionNotNormalized { sum: f64 },

    #[error("control outcome {value} out of range 0..=3")]
    ControlOutOfRange { value: usize },

    #[error("need at least {min} samples, got {k}")]
    InsufficientSamples { k: u64, min: u64 },

    #[error("normalization is undefined: the functional vanishes on the identity")]
    UndefinedNormalization,

    #[error("{what} has zero norm")]
    ZeroNorm { what: &'static str },

    #[error("empty input: {what}")]
    Empty { what: &'static str },
}
