use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("polynomials belong to different variable contexts")]
    ContextMismatch,

    #[error("unknown grading {0:?}")]
    UnknownGrading(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("grade divisor vanishes on monomial {monomial} (grading {grading})")]
    SingularGrade { monomial: String, grading: String },

    #[error("image leaves the truncated basis: {0:?}")]
    OutOfTruncation(Vec<String>),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("a/b extraction failed: {0}")]
    Extraction(String),

    #[error("consistency failure: {0}")]
    Consistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
