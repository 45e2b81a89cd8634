use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("extension degree must be at least 1, got {0}")]
    InvalidDegree(u32),
    #[error("field order {q} exceeds the table cap {cap}")]
    FieldTooLarge { q: u64, cap: u64 },
    #[error("modulus is not irreducible: {0}")]
    ReducibleModulus(String),
    #[error("F_{sub_q} is not a subfield of F_{q}")]
    NotSubfield { sub_q: u64, q: u64 },
    #[error("additive character is trivial")]
    TrivialAdditiveCharacter,
    #[error("argument must be nonzero")]
    ZeroArgument,
    #[error("characters belong to different fields (q = {0} vs q = {1})")]
    FieldMismatch(u64, u64),
    #[error("pairing matrix is singular modulo {0}")]
    SingularPairing(u32),
    #[error("characteristic {p} not supported by {what}")]
    Characteristic { p: u32, what: String },
    #[error("grid of {size} values exceeds the cap {cap}")]
    GridTooLarge { size: u64, cap: u64 },
    #[error("unknown instance `{0}`")]
    UnknownInstance(String),
    #[error("instance has no representation named `{0}`")]
    UnknownRho(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("point is outside the open orbit")]
    OutsideOrbit,
    #[error("no dual twist gives a constant ratio (best candidate `{candidate}`, residual {residual:e} at chi exponent {chi})")]
    NoDualTwist { candidate: String, residual: f64, chi: u32 },
    #[error("exponent fit failed: {0}")]
    Fit(String),
    #[error("ambiguous fit: {0}")]
    AmbiguousFit(String),
    #[error("incomplete character table: {0}")]
    IncompleteTable(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
