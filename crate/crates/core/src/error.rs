//! Error types shared by all analysis modules.

use thiserror::Error;

/// Errors produced by transforms, estimators, generators, and surrogate
/// construction.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("series too short: {actual} samples, need at least {required}")]
    SeriesTooShort { required: usize, actual: usize },

    #[error("input contains a non-finite sample at index {index}")]
    NonFiniteInput { index: usize },

    #[error("shape mismatch: {context}")]
    ShapeMismatch { context: String },

    #[error("degenerate field: all coefficients at scale {scale} are zero")]
    DegenerateField { scale: f64 },

    #[error("scaling range [{lo}, {hi}] covers {actual} scales, need at least {required}")]
    RangeTooNarrow {
        lo: f64,
        hi: f64,
        required: usize,
        actual: usize,
    },

    #[error("measure contains a negative value at index {index}")]
    NegativeMeasure { index: usize },

    #[error("series length {length} is not divisible by the largest box size {box_size}")]
    IndivisibleLength { length: usize, box_size: usize },

    #[error("no common scales between the two partition tables")]
    NoCommonScales,

    #[error("cascade iteration count {k} exceeds the supported maximum {max}")]
    KTooLarge { k: u32, max: u32 },

    #[error(
        "cross-correlation spec is infeasible: spectral eigenvalue {eigenvalue:e} \
         below tolerance"
    )]
    InfeasibleCorrelation { eigenvalue: f64 },

    #[error("constant input: correlation is undefined")]
    ConstantInput,

    #[error("shift {shift} out of range for series of length {length}")]
    ShiftOutOfRange { shift: usize, length: usize },

    #[error("order q = 0 is a removable singularity of the scaling exponent")]
    ZeroOrder,

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("numerical failure: {context}")]
    Numerical { context: String },
}

pub type Result<T> = std::result::Result<T, Error>;
