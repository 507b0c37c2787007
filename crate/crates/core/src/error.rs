use thiserror::Error;

/// Failure modes shared by every module.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("outside domain: {0}")]
    Domain(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("integer overflow: {0}")]
    Overflow(String),
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("no convergence for level {level}: last estimates {previous:.15e} and {last:.15e}")]
    Convergence { level: usize, previous: f64, last: f64 },
    #[error("internal inconsistency: {0}")]
    Inconsistency(String),
}

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Resource,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Validation(_) | Error::Domain(_) | Error::Precondition(_) => {
                ErrorKind::Validation
            }
            Error::Overflow(_)
            | Error::Resource(_)
            | Error::Convergence { .. }
            | Error::Inconsistency(_) => ErrorKind::Resource,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Error::Validation(_) => "validation",
            Error::Domain(_) => "domain",
            Error::Precondition(_) => "precondition",
            Error::Overflow(_) => "overflow",
            Error::Resource(_) => "resource",
            Error::Convergence { .. } => "convergence",
            Error::Inconsistency(_) => "inconsistency",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
