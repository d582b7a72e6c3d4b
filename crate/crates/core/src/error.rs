use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("artifact does not cover edge {edge}")]
    IncompleteArtifact { edge: usize },

    #[error("malformed artifact: {0}")]
    MalformedArtifact(String),

    #[error("round limit {limit} reached with {active} nodes still running")]
    Timeout { limit: usize, active: usize },

    #[error("enumeration budget exceeded: {0}")]
    Budget(String),

    #[error("iteration cap {cap} reached with {residual} sources left")]
    IterationCap { cap: usize, residual: usize },

    #[error("no augmenting path applied at threshold {t} with {residual} sources left")]
    Stalled { t: usize, residual: usize },

    #[error("inner reducer broke its contract at node {node}")]
    ContractViolation { node: usize },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("bad component with {size} nodes exceeds cap {cap}")]
    ComponentTooLarge { size: usize, cap: usize },

    #[error("augmenting path rejected: {0}")]
    InvalidPath(String),

    #[error("generator failed: {0}")]
    Generator(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}

pub(crate) fn precondition(msg: impl Into<String>) -> Error {
    Error::Precondition(msg.into())
}
