use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("divergent: {0}")]
    Divergent(String),
    #[error("series did not converge: {0}")]
    Convergence(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("degenerate pattern: {0}")]
    Degenerate(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
}

impl Error {
    pub fn is_divergent(&self) -> bool {
        matches!(self, Error::Divergent(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
