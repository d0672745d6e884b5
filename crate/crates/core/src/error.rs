use thiserror::Error;

use crate::access_structure::{ParticipantId, ParticipantSet};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("generator {0} is empty")]
    EmptyGenerator(ParticipantSet),

    #[error("generator {0} is a singleton")]
    SingletonGenerator(ParticipantSet),

    #[error("access structure has no generators")]
    EmptyStructure,

    #[error("unknown participant {0}")]
    UnknownParticipant(ParticipantId),

    #[error("witness is not a decreasing chain")]
    NotNormalized,

    #[error("level {level} out of range (witness has {depth} levels)")]
    LevelOutOfRange { level: usize, depth: usize },

    #[error("unknown builtin structure `{0}`")]
    UnknownBuiltin(String),

    #[error("level {level} has no generator inside {set}")]
    CoverageFailure { level: usize, set: ParticipantSet },

    #[error("level {level}: the only generator inside {set} is the whole set")]
    Unrefuted { level: usize, set: ParticipantSet },

    #[error("{0} is not prime (or exceeds 2^32)")]
    NotPrime(u64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("set {0} is not qualified")]
    NotQualified(ParticipantSet),

    #[error("missing share for participant {participant}, vector {index}")]
    MissingShare {
        participant: ParticipantId,
        index: usize,
    },

    #[error("enumeration of {size} points exceeds the bound {bound}")]
    EnumerationBound { size: String, bound: u64 },

    #[error("universe of {size} participants exceeds the brute-force bound {bound}")]
    UniverseTooLarge { size: usize, bound: usize },

    #[error("invalid distribution table: {0}")]
    InvalidTable(String),

    #[error("set {0} is qualified, nothing to check")]
    Qualified(ParticipantSet),

    #[error("impossible observation: share {value} at index {index}")]
    ImpossibleObservation { index: u64, value: u64 },
}
