use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("key rejected by family membership")]
    KeyRejected,
    #[error("input length mismatch: expected {expected} bits, got {got}")]
    InputLengthMismatch { expected: usize, got: usize },
    #[error("malformed program: {0}")]
    MalformedProgram(String),
    #[error("domain too large for exhaustive comparison ({input_len} input bits)")]
    DomainTooLarge { input_len: usize },
    #[error("no valid key of {k} bits for this family")]
    Unsamplable { k: usize },
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("learner output exceeds declared size bound ({size} > {bound} bytes)")]
    SizeBoundViolated { size: usize, bound: usize },
    #[error("oracle {index} is not claimed obfuscatable by the specification")]
    NotObfuscatable { index: usize },
    #[error("transcript corpus is empty")]
    EmptyCorpus,
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    #[error("invalid group element: {0}")]
    InvalidElement(String),
    #[error("unknown {registry} id: {id:?}")]
    UnknownId { registry: &'static str, id: String },
    #[error("bad configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
