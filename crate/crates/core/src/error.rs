use thiserror::Error;

/// Errors produced by code construction, coding and repair.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("modulus {0} is not a prime below 2^31")]
    NotPrime(u64),

    #[error("attempted to invert zero")]
    InversionOfZero,

    #[error("linear system is singular")]
    SingularSystem,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("too many erasures: {erased} erased, at most {max} recoverable")]
    TooManyErasures { erased: usize, max: usize },

    #[error("data is not consistent with any codeword")]
    NotACodeword,

    #[error("bad helper set: {0}")]
    BadHelperSet(String),

    #[error("outer code length {length} exceeds the {available} available evaluation points")]
    NotEnoughEvaluationPoints { length: usize, available: usize },

    #[error("full-weight bound inapplicable: {0}")]
    BoundInapplicable(String),

    #[error("u must exceed 3, got {0}")]
    InvalidU(u32),

    #[error("no valid scalar assignment found: {0}")]
    FieldTooSmall(String),

    #[error("repair plan omits compulsory block {0}")]
    MissingCompulsory(usize),

    #[error("repair plan has {got} helpers, expected {expected}")]
    BadPlanSize { expected: usize, got: usize },

    #[error("recovery system singular for block {failed}, coordinate {coordinate}; scalars were not validated")]
    ScalarValidationBug { failed: usize, coordinate: usize },

    #[error("read of block {0} denied: node is not live")]
    AccessDenied(usize),

    #[error("simulation trial {trial} repaired block {failed} incorrectly")]
    SimulationFailure { trial: usize, failed: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable variant name, for machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NotPrime(_) => "NotPrime",
            Error::InversionOfZero => "InversionOfZero",
            Error::SingularSystem => "SingularSystem",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::IndexOutOfRange(_) => "IndexOutOfRange",
            Error::InvalidParameters(_) => "InvalidParameters",
            Error::TooManyErasures { .. } => "TooManyErasures",
            Error::NotACodeword => "NotACodeword",
            Error::BadHelperSet(_) => "BadHelperSet",
            Error::NotEnoughEvaluationPoints { .. } => "NotEnoughEvaluationPoints",
            Error::BoundInapplicable(_) => "BoundInapplicable",
            Error::InvalidU(_) => "InvalidU",
            Error::FieldTooSmall(_) => "FieldTooSmall",
            Error::MissingCompulsory(_) => "MissingCompulsory",
            Error::BadPlanSize { .. } => "BadPlanSize",
            Error::ScalarValidationBug { .. } => "ScalarValidationBug",
            Error::AccessDenied(_) => "AccessDenied",
            Error::SimulationFailure { .. } => "SimulationFailure",
        }
    }
}
