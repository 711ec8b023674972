use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("ambient dimension {0} outside the supported range 1..=4")]
    UnsupportedDimension(usize),

    #[error("element {element} is not a member of {semigroup}")]
    NotMember { element: String, semigroup: String },

    #[error("invalid semigroup: {0}")]
    InvalidSemigroup(String),

    #[error(
        "precision budget exhausted: {required} bits would be consumed but only {budget} are available"
    )]
    PrecisionExhausted { required: u32, budget: u32 },

    #[error("invalid precision {0}: must be a multiple of 64 in 64..=512")]
    InvalidPrecision(u32),

    #[error("empty tail: no nonzero element above {anchor} inside Box({bound}); use a larger box")]
    EmptyTail { anchor: String, bound: u32 },

    #[error("schedule is not cofinal: {0}")]
    NotCofinal(String),

    #[error("space mismatch: {0}")]
    SpaceMismatch(String),

    #[error("generator maps do not commute: {0}")]
    NonCommuting(String),

    #[error("generators do not generate the sub-semigroup: {0}")]
    NotGenerating(String),

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("inconclusive verdict for `{system}`: {diagnostics}")]
    Inconclusive { system: String, diagnostics: String },

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
