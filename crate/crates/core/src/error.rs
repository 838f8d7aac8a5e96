use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is singular")]
    Singular,

    #[error("bad cauchy support: {0}")]
    BadSupport(String),

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("insufficient blocks: need {needed}, have {available}")]
    InsufficientBlocks { needed: usize, available: usize },

    #[error("blocks are mutually inconsistent")]
    InconsistentBlocks,

    #[error("capability missing: {0}")]
    CapabilityMissing(String),

    #[error("wrong helper count: expected {expected}, got {got}")]
    WrongHelperCount { expected: usize, got: usize },

    #[error("helper payload from node {node} has {got} symbols, expected {expected}")]
    BadPayloadLength {
        node: usize,
        expected: usize,
        got: usize,
    },

    #[error("erasure pattern is unrecoverable")]
    Unrecoverable,

    #[error("search space too large: {0}")]
    TooLarge(String),

    #[error("adjacent group {0} cannot supply its parity blocks")]
    NeighborUnavailable(usize),

    #[error("helper group {0} is down")]
    HelperGroupDown(usize),

    #[error("insufficient helpers: {0}")]
    InsufficientHelpers(String),

    #[error("plan invalid at step {step}: {reason}")]
    PlanInvalid { step: usize, reason: String },

    #[error("{0} failed groups; this code repairs at most one")]
    MultipleGroupFailures(usize),

    #[error("invalid scenario: {0}")]
    ScenarioInvalid(String),

    #[error("checksum mismatch in chunk {chunk}")]
    ChecksumMismatch { chunk: String },

    #[error("malformed chunk {chunk}: {reason}")]
    MalformedChunk { chunk: String, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
