use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("arithmetic overflow in {0}; use an arbitrary-precision scalar")]
    Overflow(&'static str),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix must be square and non-empty")]
    NotSquare,
    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("direct sum of an empty block list")]
    EmptyDirectSum,
    #[error("invalid group: {0}")]
    InvalidGroup(String),
    #[error("element or map does not belong to this group")]
    GroupMismatch,
    #[error("not invertible: {0}")]
    NotInvertible(String),
    #[error("matrix is not unimodular (det = {0})")]
    NotUnimodular(String),
    #[error("rank k = {0} outside the supported range 1..=16")]
    RankOutOfRange(usize),
    #[error("case {case} hypothesis violated: {reason}")]
    Hypothesis { case: u8, reason: String },
    #[error("R of the induced map on Z^k is infinite (det(E - M) = 0)")]
    InfiniteQuotient,
    #[error("affine orbit did not close within {0} steps")]
    OrbitNotClosed(usize),
    #[error("matrix has no finite order up to {0}")]
    InfiniteOrder(u64),
    #[error("not a nonzero fixed element: {0}")]
    NotFixed(String),
    #[error("enumeration cap exceeded: |group| = {size} > {cap}; try a smaller n, k or G")]
    CapExceeded { size: String, cap: u64 },
    #[error("internal consistency failure: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn parse(position: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            position,
            message: message.into(),
        }
    }
}
