use thiserror::Error;

/// Failure classes map one-to-one onto the CLI exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("schema violation at {path}: {msg}")]
    Schema { path: String, msg: String },
    #[error("numerical failure in {stage}: {msg}")]
    Numerical { stage: &'static str, msg: String },
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub fn numerical(stage: &'static str, msg: impl Into<String>) -> Self {
        Error::Numerical { stage, msg: msg.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Invalid(_) | Error::Schema { .. } | Error::Io(_) => 1,
            Error::Numerical { .. } => 2,
            Error::Verification(_) => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::Invalid(_) => "invalid_input",
            Error::Schema { .. } => "schema",
            Error::Numerical { .. } => "numerical",
            Error::Verification(_) => "verification",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
