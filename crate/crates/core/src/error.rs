use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid eigenvalue sequence: {0}")]
    InvalidSequence(String),

    #[error("eigenvalue sequence is not available in exact rational mode: {0}")]
    NotRational(String),

    #[error("invalid number literal `{0}`")]
    InvalidNumber(String),

    #[error("invalid symmetry structure: {0}")]
    InvalidStructure(String),

    #[error("multi-index {index:?} is not canonical: {reason}")]
    InvalidCanonicalIndex { index: Vec<usize>, reason: String },

    #[error("group of size {size} exceeds the permutation enumeration limit of {limit}")]
    GroupTooLarge { size: usize, limit: usize },

    #[error("power sum diverges: {0}")]
    Divergent(String),

    #[error("no finite index: {0}")]
    NoFiniteIndex(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate exponent-fit grid: {0}")]
    DegenerateGrid(String),

    #[error("asymptotics of the structure schedule cannot be certified: {0}")]
    UnknownAsymptotics(String),
}
