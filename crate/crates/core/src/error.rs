use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad classification used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad input data, schema mismatch, malformed files.
    Data,
    /// An internal invariant was violated.
    Internal,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("argument ids must be non-empty")]
    EmptyArgumentId,
    #[error("unknown argument `{0}`")]
    UnknownArgument(String),
    #[error("duplicate argument id `{0}`")]
    DuplicateArgument(String),
    #[error("framework has {size} arguments, enumeration bound is {bound}")]
    SizeBoundExceeded { size: usize, bound: usize },

    #[error("unknown condition kind `{0}`")]
    UnknownConditionKind(String),
    #[error("invalid parameters for condition `{kind}`: {reason}")]
    InvalidCondition { kind: String, reason: String },
    #[error("state is missing feature `{0}`")]
    MissingFeature(String),
    #[error("feature `{name}` is not finite ({value})")]
    NonFiniteFeature { name: String, value: f64 },
    #[error("action `{0}` is not in the action alphabet")]
    UnknownAction(String),
    #[error("agent index {index} out of range for team of {team_size}")]
    AgentOutOfRange { index: usize, team_size: usize },
    #[error("no value assigned to argument `{0}`")]
    MissingValue(String),
    #[error("value {value} assigned to both `{first}` and `{second}`")]
    DuplicateValue {
        value: i64,
        first: String,
        second: String,
    },
    #[error("accepted primary arguments of agent {agent} recommend both `{first}` and `{second}`")]
    InconsistentPrimaries {
        agent: usize,
        first: String,
        second: String,
    },
    #[error("invalid catalog: {0}")]
    InvalidCatalog(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("graph contains a cycle; {remaining} nodes could not be ordered")]
    CycleDetected { remaining: usize },
    #[error("default ordering does not cover node `{0}`")]
    MissingNode(String),
    #[error("invalid ordering: {0}")]
    InvalidOrdering(String),

    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("episode {episode} step {step} has no action for agent {agent}")]
    DataGap {
        episode: u64,
        step: usize,
        agent: usize,
    },
    #[error("no trajectory data to evaluate")]
    NoData,
    #[error("team size mismatch: expected {expected}, found {found}")]
    TeamSizeMismatch { expected: usize, found: usize },

    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::DuplicateValue { .. } | Error::InconsistentPrimaries { .. } => {
                ErrorClass::Internal
            }
            _ => ErrorClass::Data,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
