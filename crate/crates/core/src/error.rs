use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dissimilarity space: {0}")]
    InvalidSpace(String),

    #[error("invalid mass function: {0}")]
    InvalidMass(String),

    #[error("tie under strict policy: d({x}, {y}) and d({x}, {z}) are equal")]
    Tie { x: String, y: String, z: String },

    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),

    #[error("invalid comparison record: {0}")]
    InvalidRecord(String),

    #[error("invalid marginal: {0}")]
    InvalidMarginal(String),

    #[error("index {index} out of range for a space of {len} points")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("subset must be non-empty")]
    EmptySet,

    #[error("subset has zero mass; renormalization is undefined")]
    ZeroMass,

    #[error("set {{{0}}} is not point-like")]
    NotPointLike(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid transformation: {0}")]
    InvalidTransformation(String),

    #[error("{0}")]
    Capability(String),

    #[error("internal inconsistency: {0}")]
    Inconsistent(String),

    #[error("legacy cohesion requires uniform masses")]
    NonUniformMass,

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("generator: {0}")]
    Generator(String),

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn parse(line: u64, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
