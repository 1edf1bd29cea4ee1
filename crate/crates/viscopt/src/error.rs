use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("invalid mesh: {0}")]
    Mesh(String),
    #[error("invalid parameter `{key}`: {reason}")]
    Param { key: String, reason: String },
    #[error("linear solve failed ({what}, n = {n}, nnz = {nnz}): {reason}")]
    Solve {
        what: String,
        n: usize,
        nnz: usize,
        reason: String,
    },
    #[error("missing boundary label {0}")]
    MissingLabel(&'static str),
    #[error("solver quality: {0}")]
    Quality(String),
    #[error("frequency {freq_hz} Hz: {source}")]
    AtFrequency {
        freq_hz: f64,
        #[source]
        source: Box<Error>,
    },
    #[error("iteration {iter}: {source}")]
    AtIteration {
        iter: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("config parse error: {0}")]
    ConfigParse(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed file: {reason}")]
    Format { path: PathBuf, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn param(key: &str, reason: impl Into<String>) -> Self {
        Error::Param {
            key: key.to_string(),
            reason: reason.into(),
        }
    }

    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Geometry(_) => "geometry",
            Error::Mesh(_) => "mesh",
            Error::Param { .. } => "param",
            Error::Solve { .. } => "solve",
            Error::MissingLabel(_) => "missing-label",
            Error::Quality(_) => "quality",
            Error::AtFrequency { source, .. } | Error::AtIteration { source, .. } => source.kind(),
            Error::ConfigParse(_) => "config",
            Error::Io { .. } => "io",
            Error::Format { .. } => "format",
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
