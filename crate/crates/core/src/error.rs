use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("algebra dimension {0} outside 1..=16")]
    DimensionOutOfRange(usize),
    #[error("index {index} out of range for dimension {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("angle {0} is not representable exactly")]
    AngleNotRepresentable(String),
    #[error("element is not a unit even multivector")]
    NotSpinElement,
    #[error("group closure exceeded {0} elements")]
    ClosureGuard(usize),
    #[error("coefficient {0} has a non-dyadic denominator")]
    NonDyadic(String),
    #[error("odd dimension {0} has no half-spin splitting")]
    OddDimension(usize),
    #[error("rank {0} is outside the supported residue classes for this operation")]
    WrongResidue(usize),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("size guard exceeded: N = {n} > {limit}")]
    SizeGuard { n: usize, limit: usize },
    #[error("malformed loop: {0}")]
    MalformedLoop(String),
    #[error("matrix is not diagonal")]
    NotDiagonal,
    #[error("oracle disagreement in {context}: {left} vs {right}")]
    OracleDisagreement {
        context: String,
        left: String,
        right: String,
    },
    #[error("invalid structure: {0}")]
    InvalidStructure(String),
    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
