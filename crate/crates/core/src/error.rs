use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the library.
///
/// Variants split into two families: input problems (shapes, preconditions,
/// configuration, malformed data) and numerical failures (factorisations,
/// series that refuse to converge). The CLI maps them to different exit codes
/// through [`Error::is_numerical`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("out of domain: {0}")]
    Domain(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("not implemented: {0}")]
    NotImplemented(String),

    #[error("ill-conditioned system: {0}")]
    Conditioning(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("kernel evaluation failed for pair ({row}, {col}): {source}")]
    Pair {
        row: usize,
        col: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Conditioning(_) | Error::Numerical(_) => true,
            Error::Pair { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

pub(crate) fn shape(msg: impl Into<String>) -> Error {
    Error::Shape(msg.into())
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
