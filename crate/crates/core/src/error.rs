use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("node index {index} out of range for {node_count} nodes")]
    NodeOutOfRange { index: usize, node_count: usize },

    #[error("self-loop on node {0}")]
    SelfLoop(usize),

    #[error("negative weight {weight} on edge ({i}, {j})")]
    NegativeWeight { i: usize, j: usize, weight: f64 },

    #[error("non-finite value {value} at {what}")]
    NonFinite { what: String, value: f64 },

    #[error("edge ({i}, {j}) listed with conflicting weights {first} and {second}")]
    ConflictingEdge {
        i: usize,
        j: usize,
        first: f64,
        second: f64,
    },

    #[error("duplicate label for node {0}")]
    DuplicateLabel(usize),

    #[error("label set is empty")]
    EmptyLabels,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("singular system: node {node} is unlabeled, isolated from every anchor, and has zero prior weight")]
    Singular { node: usize },

    #[error("alpha is {value} on abstaining vote (node {node}, labeler {labeler})")]
    AlphaOnAbstain { node: usize, labeler: usize, value: f64 },

    #[error("zero denominator in {0}")]
    ZeroDenominator(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// True for errors caused by bad user input rather than by an internal failure.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io { .. } | Error::ZeroDenominator(_))
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
