use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Dimension of an exact computation that ran into its size guard.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    /// Number of nodes with positive sampling probability.
    SupportSize,
    /// Number of distinct nodes to collect.
    SampleK,
    /// Largest total draw count enumerated.
    VMax,
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dimension::SupportSize => "support size",
            Dimension::SampleK => "k",
            Dimension::VMax => "v_max",
        })
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("resource limit: {dimension} = {value} exceeds the limit {limit}{detail}")]
    ResourceLimit {
        dimension: Dimension,
        value: usize,
        limit: usize,
        detail: String,
    },

    #[error("unsupported configuration: {0}")]
    UnsupportedConfiguration(String),

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn limit(dimension: Dimension, value: usize, limit: usize) -> Self {
        Error::ResourceLimit {
            dimension,
            value,
            limit,
            detail: String::new(),
        }
    }
}
