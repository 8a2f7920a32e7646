use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {msg}")]
    Parse { path: String, line: u64, msg: String },

    #[error("duplicate key: {0}")]
    DuplicateKey(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("unknown country code: {0}")]
    UnknownCountry(String),

    #[error("country {0} appears in more than one region group")]
    OverlappingGroups(String),

    #[error("export matrix is all zero")]
    AllZero,

    #[error("product universes do not match: {0}")]
    UniverseMismatch(String),

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("IQR undefined: {0}")]
    UndefinedIqr(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub(crate) fn parse(path: &str, line: u64, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.to_string(),
            line,
            msg: msg.into(),
        }
    }
}
