use std::fmt;

use thiserror::Error;

use crate::loss::LossFamily;

pub type Result<T> = std::result::Result<T, Error>;

/// A LIBSVM-format syntax or validation failure, tagged with the
/// 1-based line number it occurred on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{family} loss is not differentiable; use a subgradient method")]
    NonDifferentiable { family: LossFamily },

    #[error("{op} is not supported for the {family} loss")]
    Unsupported { op: &'static str, family: LossFamily },

    #[error("argument {value} lies outside the open interval ({lower}, {upper})")]
    OutOfDomain { value: f64, lower: f64, upper: f64 },

    #[error("invalid generator pair: {0}")]
    InvalidGenerator(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid sparse matrix: {0}")]
    InvalidMatrix(String),

    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),

    #[error("pegasos requires the hinge loss, got {0}")]
    WrongLoss(LossFamily),

    #[error("cannot split {n} instances into {folds} folds")]
    TooFewInstances { n: usize, folds: usize },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("parse error at {0}")]
    Parse(#[from] ParseError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
