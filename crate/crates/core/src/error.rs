use thiserror::Error;

use crate::rational::QVector;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("malformed rational {0:?}")]
    MalformedRational(String),
    #[error("malformed document: {0}")]
    Document(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("half-space {0} has a zero normal")]
    ZeroNormal(usize),
    #[error("need at least dim+1 = {needed} half-spaces, got {got}")]
    TooFewHalfSpaces { needed: usize, got: usize },
    #[error("polytope is unbounded")]
    Unbounded,
    #[error("polytope is not full-dimensional")]
    NotFullDimensional,
    #[error("polytope is not simple: vertex {vertex} lies on facets {tight:?}")]
    NotSimple { vertex: QVector, tight: Vec<usize> },
    #[error("half-space {0} is redundant")]
    RedundantHalfSpace(usize),
    #[error(
        "polarizing vector is not generic: it pairs to zero with edge {edge} at vertex {vertex}"
    )]
    GenericityFailure { vertex: usize, edge: QVector },
    #[error("center is not admissible: projection leaves the relative interior on faces {0:?}")]
    AssumptionViolated(Vec<Vec<usize>>),
    #[error("degenerate pairing on face {face:?} with normal generator {generator}")]
    DegeneratePairing {
        face: Vec<usize>,
        generator: QVector,
    },
    #[error("usage: {0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable camelCase name of the variant.
    pub fn name(&self) -> &'static str {
        match self {
            Error::MalformedRational(_) => "malformedRational",
            Error::Document(_) => "document",
            Error::DimensionMismatch { .. } => "dimensionMismatch",
            Error::ZeroNormal(_) => "zeroNormal",
            Error::TooFewHalfSpaces { .. } => "tooFewHalfSpaces",
            Error::Unbounded => "unbounded",
            Error::NotFullDimensional => "notFullDimensional",
            Error::NotSimple { .. } => "notSimple",
            Error::RedundantHalfSpace(_) => "redundantHalfSpace",
            Error::GenericityFailure { .. } => "genericityFailure",
            Error::AssumptionViolated(_) => "assumptionViolated",
            Error::DegeneratePairing { .. } => "degeneratePairing",
            Error::Usage(_) => "usage",
        }
    }

    /// Failures of a parameter precondition (as opposed to malformed input).
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            Error::GenericityFailure { .. }
                | Error::AssumptionViolated(_)
                | Error::DegeneratePairing { .. }
        )
    }
}
