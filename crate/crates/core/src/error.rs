use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("not a loop at the basepoint")]
    NotALoop,
    #[error("elliptic element: {0}")]
    EllipticElement(String),
    #[error("edge {0} is not collapsible")]
    NotCollapsible(String),
    #[error("invalid expansion: {0}")]
    InvalidExpansion(String),
    #[error("graph is not reduced")]
    NotReduced,
    #[error("stale cut: the Whitehead graph no longer yields this cut")]
    StaleCut,
    #[error("loop edge {0} present; subdivide loops first")]
    LoopEdgePresent(String),
    #[error("invalid fold: {0}")]
    InvalidFold(String),
    #[error("edge group of {0} is not allowed by the family")]
    NotAllowed(String),
    #[error("factor systems have different parent groups")]
    MismatchedParents,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
