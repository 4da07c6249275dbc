use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("undeclared symbol `{name}` at line {line}, column {column}")]
    UndeclaredSymbol { name: String, line: usize, column: usize },
    #[error("non-rational coefficient at line {line}, column {column}: {message}")]
    NonRationalCoefficient { line: usize, column: usize, message: String },
    #[error("involution not reached within order budget {max_order}")]
    OrderBudgetExceeded { max_order: usize },
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("module is not torsion-free ({generators} torsion generators)")]
    NotTorsionFree { generators: usize },
    #[error("degenerate metric: {0}")]
    DegenerateMetric(String),
    #[error("unsupported dimension: {0}")]
    UnsupportedDimension(String),
    #[error("unknown command or name: {0}")]
    Unknown(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
