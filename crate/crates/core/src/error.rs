use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by the pipeline stages.
#[derive(Debug, Error)]
pub enum Error {
    /// Two vectors (or a vector and a cloud) disagree on dimension.
    #[error("dimension mismatch: expected {expected}, got {found}{}", fmt_ctx(.context))]
    Dimension {
        expected: usize,
        found: usize,
        context: String,
    },

    /// A vector with (effectively) zero norm where a direction is required.
    #[error("zero-norm vector{}", fmt_ctx(.context))]
    DegenerateVector { context: String },

    /// The signed concept sum cancelled to the zero vector.
    #[error("degenerate direction: signed concept sum has zero norm")]
    DegenerateDirection,

    /// An operation that requires data received none.
    #[error("empty input: {0}")]
    EmptyInput(String),

    /// A record id was referenced but is not present in the point cloud.
    #[error("unknown record id `{0}`")]
    UnknownRecord(String),

    /// A record id was inserted twice.
    #[error("duplicate record id `{0}`")]
    DuplicateRecord(String),

    /// A file did not parse; `line` is 1-based (0 for non-line-oriented content).
    #[error("parse error in {path} (line {line}): {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    /// The embeddings endpoint failed after all retries.
    #[error("embeddings endpoint error: {0}")]
    Endpoint(String),

    /// A parameter is outside its documented range.
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub(crate) fn parse(path: &std::path::Path, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.display().to_string(),
            line,
            message: message.into(),
        }
    }
}

fn fmt_ctx(context: &str) -> String {
    if context.is_empty() {
        String::new()
    } else {
        format!(" ({context})")
    }
}
