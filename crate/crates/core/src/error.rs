use thiserror::Error;

use crate::partitions::Partition;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parts {0:?} are not nonincreasing")]
    NotAPartition(Vec<usize>),
    #[error("cell ({row},{col}) is outside the diagram of ({shape})")]
    CellOutside {
        row: usize,
        col: usize,
        shape: Partition,
    },
    #[error("partition ({shape}) has more than {bound} parts")]
    LengthExceeds { shape: Partition, bound: usize },
    #[error("{0} requires a nonzero partition")]
    ZeroPartition(&'static str),
    #[error("twist index {index} out of range for rank {rank}")]
    TwistIndex { index: usize, rank: usize },
    #[error("flag indices {indices:?} are not strictly increasing below {rank}")]
    FlagIndices { indices: Vec<usize>, rank: usize },
    #[error("{0:?} is not a permutation")]
    NotAPermutation(Vec<usize>),
    #[error("degree mismatch: expected S_{expected}, got S_{found}")]
    DegreeMismatch { expected: usize, found: usize },
    #[error("tensor space of dimension {dim} exceeds the construction cap {cap}")]
    CapExceeded { dim: u128, cap: u128 },
    #[error("matrix shape mismatch: {0}")]
    Shape(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
