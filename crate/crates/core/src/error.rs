use thiserror::Error;

use crate::combinatorics::PartitionError;
use crate::gf::FieldError;
use crate::poly::PolyError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error("enumeration cost {cost} exceeds budget {budget}")]
    Budget { cost: u128, budget: u64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("factorization of {0} does not multiply back")]
    Reconstruction(String),
    #[error("exact accumulator overflow")]
    Overflow,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
