use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("cannot parse {0:?} as a decimal number")]
    Parse(String),

    #[error("no convergence in {routine} after {iterations} iterations")]
    NoConvergence {
        routine: &'static str,
        iterations: usize,
    },

    #[error("paper {0} contains neither complete test statistics nor p-values")]
    UndefinedPaper(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("degenerate table: {0}")]
    Degenerate(String),

    #[error("zero margin: {0}")]
    ZeroMargin(String),

    #[error("design matrix is rank deficient; collinear columns: {}", .0.join(", "))]
    RankDeficient(Vec<String>),

    #[error("models are not nested: {0}")]
    NotNested(String),

    #[error("unknown level {0:?}")]
    UnknownLevel(String),
}

pub type Result<T> = std::result::Result<T, Error>;
