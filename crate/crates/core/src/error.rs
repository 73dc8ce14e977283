use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("line {line}: self-loop on vertex {vertex}")]
    SelfLoop { line: usize, vertex: usize },

    #[error("line {line}: vertex {vertex} out of range 1..={n}")]
    VertexOutOfRange { line: usize, vertex: usize, n: usize },

    #[error("line {line}: duplicate edge ({u}, {v})")]
    DuplicateEdge { line: usize, u: usize, v: usize },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid graph class: {0}")]
    InvalidClass(String),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid thresholds: {0}")]
    InvalidThresholds(String),

    #[error("invalid mechanism: {0}")]
    InvalidMechanism(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{what} has {size} elements, above the cap of {cap}")]
    CapExceeded { what: String, size: String, cap: u64 },

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
