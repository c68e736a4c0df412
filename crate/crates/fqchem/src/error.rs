use thiserror::Error;

/// Errors surfaced by the estimation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid bit width: {0}")]
    InvalidWidth(String),

    #[error("unsupported size: {0}")]
    UnsupportedSize(String),

    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("infeasible error budget: {0}")]
    InfeasibleBudget(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI (0 success, 2 parse, 3 infeasible,
    /// 4 unsupported, 5 reproduction tolerance).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) => 2,
            Error::InfeasibleBudget(_) => 3,
            Error::UnsupportedSize(_) => 4,
            Error::InvalidWidth(_) | Error::InvalidSystem(_) | Error::Domain(_) => 2,
        }
    }
}
