use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at offset {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown atom `{0}`")]
    UnknownAtom(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("invalid theory `{name}`:\n{report}")]
    InvalidTheory { name: String, report: String },

    #[error("filters belong to different theories")]
    TheoryMismatch,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("witness enumeration exhausted at stage {stage}: wanted witness #{index}, only {available} available")]
    Exhausted {
        stage: usize,
        index: usize,
        available: usize,
    },

    #[error("malformed derivation at {path}: {reason}")]
    Derivation { path: String, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
