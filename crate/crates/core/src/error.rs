use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid space: {0}")]
    InvalidSpec(String),

    #[error("generator index {index} out of range 0..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("multi-index has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("ambient variable count mismatch: {left} vs {right}")]
    VarMismatch { left: usize, right: usize },

    #[error("operator does not preserve the space: image of {basis} contains {offending}")]
    NotInvariant { basis: String, offending: String },

    #[error("anticommutator fit is rank deficient: rank {rank}, need {needed}")]
    DegenerateFit { rank: usize, needed: usize },

    #[error("anticommutator fit is inconsistent: no α reproduces the representation")]
    InconsistentFit,

    #[error("invalid Young element: {0}")]
    InvalidYoung(String),

    #[error("case 2 requires an even Δ, got {0}")]
    OddDelta(u32),

    #[error("parse error: {0}")]
    Parse(String),
}
