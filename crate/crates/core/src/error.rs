use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid generator parameters, run spec values or similar user input.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// A move set that violates the model. Always a bug in a daemon or caller.
    #[error("engine error: {0}")]
    Engine(String),

    #[error("script error: {0}")]
    Script(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("instrumentation failure: {0}")]
    Instrumentation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
