use thiserror::Error;

#[derive(Debug, Error)]
pub enum HopfError {
    #[error("matrix is not antisymmetric; the linear field is not tangent to the sphere")]
    NotAntisymmetric,
    #[error("matrix is not orthogonal")]
    NotOrthogonal,
    #[error("no explicit basis for eigenvalue {0}; use eigenspace_solve")]
    UnsupportedEigenvalue(i64),
    #[error("candidate spectrum does not exhaust the space: {0}")]
    SpectrumIncomplete(String),
    #[error("coefficient degree {degree} exceeds the configured limit {limit}")]
    DegreeOverflow { degree: u32, limit: u32 },
    #[error("helicity undefined: {0}")]
    HelicityUndefined(String),
    #[error("functional undefined: helicity vanishes")]
    ZeroHelicity,
    #[error("input outside the required span: {0}")]
    NotInSpan(String),
    #[error("parity mismatch: {0}")]
    Parity(String),
    #[error("no positive eigenvalue in the pencil: {0}")]
    NoPositiveEigenvalue(String),
    #[error("field vanishes on the verification grid")]
    VanishingField,
    #[error("matrix is not positive definite: {0}")]
    Indefinite(String),
    #[error("function is not mean-zero")]
    NotMeanZero,
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, HopfError>;
