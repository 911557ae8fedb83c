use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed rational `{0}`")]
    MalformedRational(String),
    #[error("radicand {0} is not a square-free positive integer")]
    InvalidRadicand(u64),
    #[error("partition mismatch: l + sum(d) = {sum} but n = {n}")]
    PartitionMismatch { n: usize, sum: usize },
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("alpha not increasing at index {0}")]
    AlphaNotIncreasing(usize),
    #[error("negative soliton parameter a")]
    NegativeA,
    #[error("expected {expected} alpha values, got {got}")]
    AlphaCount { expected: usize, got: usize },
    #[error("alpha values mix quadratic fields sqrt({0}) and sqrt({1})")]
    MixedQuadraticFields(u64, u64),
    #[error("operation requires rational parameters")]
    IrrationalParameter,
    #[error("index {index} out of range 0..={max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("coordinates are not pairwise distinct")]
    DuplicateEntries,
    #[error("pole {0} collides with a coordinate")]
    PoleCollision(String),
    #[error("coordinates violate the interleaving of the open domain at index {0}")]
    NotInterleaved(usize),
    #[error("nonzero remainder in exact division: {0}")]
    InexactDivision(String),
    #[error("chart point outside the open domain: {0}")]
    OutsideDomain(String),
    #[error("affine chart coordinate too large: |w| = {0}")]
    OutsideAffineChart(f64),
    #[error("metric is not positive definite (min eigenvalue {0})")]
    NotPositiveDefinite(f64),
    #[error("ill-conditioned metric (condition number {0:e})")]
    IllConditioned(f64),
    #[error("floating-point input cannot certify rational dependence")]
    UntaggedFloat,
    #[error("quadrature did not converge (error estimate {0:e})")]
    QuadratureFailed(f64),
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
