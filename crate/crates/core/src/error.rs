use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("no value bound for variable `{0}`")]
    Unbound(String),
    #[error("sort error: {0}")]
    Sort(String),
}

/// Errors raised while reading programs, predicates and other inputs.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: undeclared variable `{name}`")]
    Undeclared { name: String, line: usize, col: usize },
    #[error("{line}:{col}: primed variable `{name}` is not allowed here")]
    Primed { name: String, line: usize, col: usize },
    #[error("{line}:{col}: passive variable `{name}@P` is not allowed here")]
    Passive { name: String, line: usize, col: usize },
    #[error("{line}:{col}: sort mismatch: {msg}")]
    Sort { line: usize, col: usize, msg: String },
    #[error("duplicate declaration of `{0}`")]
    Duplicate(String),
    #[error("program declares no locations (the pc domain must be finite and non-empty)")]
    NoLocations,
    #[error("unknown location `{0}`")]
    UnknownLocation(String),
    #[error("predicate `{0}` mentions passive variables but no active locals; its class is undefined")]
    PassiveOnly(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("failed to start solver `{path}`: {source}")]
    Spawn { path: String, source: std::io::Error },
    #[error("solver i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("solver protocol: {0}")]
    Protocol(String),
    #[error("enumeration domain too large: {0}")]
    DomainTooLarge(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("program is not monotone: {0}")]
    NotMonotone(String),
    #[error("malformed template: {0}")]
    Template(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
