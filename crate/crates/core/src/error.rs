use thiserror::Error;

use crate::protocol::{OutcomeTuple, Stage};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Every outcome of a measurement had probability below the sampling floor,
    /// or a forced outcome pointed at such a branch.
    #[error("numeric degeneracy: {0}")]
    NumericDegeneracy(String),

    #[error("configuration rejected: d1*d2 = {product} exceeds channel dimension d = {d}")]
    DimensionGate {
        d1: usize,
        d2: usize,
        d: usize,
        product: usize,
    },

    #[error("internal invariant broken during {stage}: {detail}")]
    Invariant { stage: Stage, detail: String },

    #[error("branch {outcomes}: {source}")]
    AtBranch { outcomes: OutcomeTuple, source: Box<Error> },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn invariant(stage: Stage, detail: impl Into<String>) -> Self {
        Error::Invariant {
            stage,
            detail: detail.into(),
        }
    }
}
