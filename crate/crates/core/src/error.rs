use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("arity mismatch: {0}")]
    Arity(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("degenerate: {0}")]
    Degenerate(String),
    #[error("not in the monomial class: {0}")]
    Class(String),
    #[error("bracket does not straddle the threshold: {0}")]
    Bracket(String),
}

pub type Result<T> = std::result::Result<T, Error>;
