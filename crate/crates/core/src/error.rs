use thiserror::Error;

/// Errors raised by the library. Each variant maps onto a stable reason code
/// used by the CLI and the C API.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("size error: {0}")]
    Size(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("missing value: {0}")]
    Missing(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Machine-readable reason code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Size(_) => "size",
            Error::Dimension { .. } => "dimension",
            Error::Domain(_) => "domain",
            Error::Precondition(_) => "precondition",
            Error::Infeasible(_) => "infeasible",
            Error::Parse(_) => "parse",
            Error::Missing(_) => "missing",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::Dimension { expected, actual })
    }
}
