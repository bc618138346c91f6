use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("resource limit exceeded: {what} = {requested} exceeds budget {budget}")]
    ResourceLimit {
        what: &'static str,
        requested: u64,
        budget: u64,
    },

    #[error("cache file rejected: {0}")]
    Cache(String),

    #[error("io error: {0}")]
    Io(#[from] io::Error),

    #[error("internal consistency failure: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}

/// Size ceilings for the expensive builders. Requests above these fail with
/// [`Error::ResourceLimit`] instead of exhausting memory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    /// Largest `limit` accepted by the multiplicative sieve.
    pub max_table_limit: usize,
    /// Largest number of Fourier coefficients computed for one eigenform.
    pub max_coefficient_limit: usize,
    /// Largest value bound accepted by lattice enumeration.
    pub max_lattice_bound: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_table_limit: 200_000_000,
            max_coefficient_limit: 16_000_000,
            max_lattice_bound: 100_000,
        }
    }
}

impl Budget {
    pub(crate) fn check(what: &'static str, requested: u64, budget: u64) -> Result<()> {
        if requested > budget {
            Err(Error::ResourceLimit {
                what,
                requested,
                budget,
            })
        } else {
            Ok(())
        }
    }
}
