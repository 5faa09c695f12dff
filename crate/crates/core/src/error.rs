//! Error type shared by every module.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid length: {0}")]
    InvalidLength(String),
    #[error("index {index} out of range 1..={len}")]
    Index { index: usize, len: usize },
    #[error("write attempted on a read-only (QRAM) store")]
    Mode,
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("empty candidate domain")]
    EmptyDomain,
    #[error("invalid description: {0}")]
    Description(String),
    #[error("problem definition error: {0}")]
    ProblemDefinition(String),
    #[error("padding required: length {0} is not a power of two")]
    PaddingRequired(usize),
    #[error("input too short: {0}")]
    TooShort(String),
    #[error("symbol {0:?} outside the alphabet")]
    Alphabet(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("value out of range: {0}")]
    ValueRange(String),
    #[error("oracle capacity exceeded: {0}")]
    OracleCapacity(String),
    #[error("weight accounting: {0}")]
    WeightAccounting(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("unknown problem tag {0:?}")]
    UnknownProblem(String),
}

pub type Result<T> = std::result::Result<T, Error>;
