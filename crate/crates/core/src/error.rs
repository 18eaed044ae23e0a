use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unbound variable {0}")]
    UnboundVariable(String),
    #[error("variable {0} bound twice")]
    DuplicateBinder(String),
    #[error("variable {0} occurs negatively")]
    NegativeOccurrence(String),
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("arity mismatch: {0}")]
    ArityMismatch(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("budget exhausted: {0}")]
    BudgetExhausted(String),
}

pub type Result<T> = std::result::Result<T, Error>;
