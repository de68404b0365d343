use thiserror::Error;

/// Problems with user-supplied data: unparseable files, malformed scalars,
/// invalid algebras or operators. Maps to exit code 1 in the CLI.
#[derive(Debug, Error)]
pub enum InputError {
    #[error("cannot parse scalar literal {literal:?}: {reason}")]
    BadScalar { literal: String, reason: String },
    #[error("gaussian scalar {literal:?} not allowed in rational mode")]
    GaussianInRationalMode { literal: String },
    #[error("unknown builtin algebra {0:?}")]
    UnknownBuiltin(String),
    #[error("builtin parameter must be positive, got {0}")]
    NonPositiveParameter(i64),
    #[error("basis index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("structure constants must be given for i < j only, got ({i}, {j})")]
    BracketIndexOrder { i: usize, j: usize },
    #[error("algebra validation failed: {0}")]
    InvalidAlgebra(String),
    #[error("operator has no term of positive weight with nonzero coefficient")]
    ZeroOperator,
    #[error("top-weight term (weight {weight}) has zero coefficient; weighted order is part of the problem statement")]
    ZeroTopCoefficient { weight: u32 },
    #[error("coefficient matrix of term {term} must be {rank_f}x{rank_e}")]
    BadCoefficientShape { term: usize, rank_f: usize, rank_e: usize },
    #[error("bundle ranks must be at least 1")]
    BadBundleRank,
    #[error("{0}")]
    Malformed(String),
}

/// A cross-module assertion failed. This always signals an implementation
/// bug, never bad input, and is never swallowed. Maps to exit code 2.
#[derive(Debug, Error)]
#[error("internal consistency check {check:?} failed: {detail}")]
pub struct ConsistencyError {
    pub check: String,
    pub detail: String,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Input(#[from] InputError),
    #[error(transparent)]
    Consistency(#[from] ConsistencyError),
}

impl ConsistencyError {
    pub fn new(check: impl Into<String>, detail: impl Into<String>) -> Self {
        ConsistencyError {
            check: check.into(),
            detail: detail.into(),
        }
    }
}
