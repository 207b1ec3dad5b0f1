use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("numerically degenerate: {0}")]
    NumericDegenerate(String),

    /// A collapse was requested onto an outcome with zero probability.
    #[error("cannot collapse qubit {qubit} to {value}: outcome has zero probability")]
    InvalidCollapse { qubit: usize, value: bool },

    #[error("both rounded marginals of free qubit {0} are zero")]
    DegenerateMarginal(usize),

    #[error("iteration count is unbounded: {0}")]
    Unbounded(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
