use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid structure spec: {0}")]
    InvalidSpec(String),

    #[error("code {code} is not materialized (prefix has {materialized} elements)")]
    NotMaterialized { code: usize, materialized: usize },

    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },

    #[error("{0} lies in the parameter set")]
    InParameterSet(usize),

    #[error("condition sets overlap at {0}")]
    OverlappingCondition(usize),

    #[error("descriptor {descriptor} is undecidable at code {code}")]
    Undecidable { descriptor: String, code: usize },

    #[error("not a partial isomorphism: pairs {first:?} and {second:?} disagree")]
    NotPartialIso { first: (usize, usize), second: (usize, usize) },

    #[error("orbit {n} exhausted at column {k}; increase bound")]
    OrbitExhausted { n: usize, k: usize },

    #[error("empty window at step {k}; increase bound")]
    EmptyWindow { k: usize },

    #[error("support too sparse at bound for element {n}")]
    SupportTooSparse { n: usize },

    #[error("chain point z_{0} is not materialized")]
    MissingChainPoint(i64),

    #[error("{0}")]
    Refused(String),

    #[error("{0}")]
    Unsupported(String),

    #[error("sampler found no representative under bound for orbit {0}")]
    NoRepresentative(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
