use std::fmt;

use thiserror::Error;

use crate::functor::StateId;

/// Why a pointed coalgebra failed the well-pointedness check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    /// The states reachable from the point form a proper subcoalgebra.
    Unreachable { reachable: Vec<StateId> },
    /// Two distinct states with the same behavior.
    Mergeable(StateId, StateId),
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Unreachable { reachable } => {
                write!(f, "proper subcoalgebra containing the point: {reachable:?}")
            }
            Witness::Mergeable(a, b) => write!(f, "states {a} and {b} are behaviorally equivalent"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("ill-typed term: {0}")]
    Type(String),

    #[error("state index {index} out of range for carrier of size {size}")]
    IndexOutOfRange { index: StateId, size: usize },

    #[error("functor mismatch: expected {expected}, found {found}")]
    FunctorMismatch { expected: String, found: String },

    #[error("coalgebra is not well-founded (state {state} lies outside the well-founded part)")]
    NotWellFounded { state: StateId },

    #[error("coalgebra is not well-pointed: {0}")]
    NotWellPointed(Witness),

    #[error("full tree expansion diverges: state {state} has an infinite path")]
    FullExpansionDiverges { state: StateId },

    #[error("enumeration needs {needed} structure maps, above the limit of {limit}")]
    ResourceLimit { needed: String, limit: u128 },

    #[error("cannot decode: {0}")]
    Decode(String),

    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn parse(pos: usize, msg: impl Into<String>) -> Self {
        Error::Parse { pos, msg: msg.into() }
    }

    /// Errors that come from the mathematics rather than from malformed input.
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            Error::FunctorMismatch { .. }
                | Error::NotWellFounded { .. }
                | Error::NotWellPointed(_)
                | Error::FullExpansionDiverges { .. }
                | Error::ResourceLimit { .. }
                | Error::Decode(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
