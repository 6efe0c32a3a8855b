use thiserror::Error;

/// Failure categories shared by every module.
///
/// The category name is what the command-line front end prints as
/// `error: <category>: <detail>`.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter lies outside its mathematical domain.
    #[error("domain: {0}")]
    Domain(String),
    /// Input data is unusable (empty, non-positive, degenerate).
    #[error("data: {0}")]
    Data(String),
    /// A configuration value is inconsistent or out of range.
    #[error("config: {0}")]
    Config(String),
    /// An operation was applied to a state it is not defined on.
    #[error("state: {0}")]
    State(String),
    /// The requested parameter regime is not supported by this routine.
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("io: {0}")]
    Io(String),
}

impl Error {
    pub fn category(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Data(_) => "data",
            Error::Config(_) => "config",
            Error::State(_) => "state",
            Error::Unsupported(_) => "unsupported",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Data(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
