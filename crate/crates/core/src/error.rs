use alloc::string::String;

/// Errors raised by the algorithmic core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("graph has no vertices")]
    EmptyGraph,
    #[error("vertex {0} is not in the graph")]
    UnknownVertex(u32),
    #[error("vocabulary is empty")]
    EmptyVocabulary,
    #[error("vertex {0} has no leaf in the output tree")]
    UnassignedLeaf(u32),
    #[error("vocabulary bound of {n_max} vertices exceeded by vertex {vertex}")]
    VocabularyOverflow { n_max: usize, vertex: String },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("training split of {train} leaves {test} test vertices")]
    DegenerateSplit { train: usize, test: usize },
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
