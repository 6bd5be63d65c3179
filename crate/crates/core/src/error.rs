use std::path::PathBuf;

/// Errors produced anywhere in the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid state: {0}")]
    State(String),

    #[error("non-finite value in `{param}`")]
    Numerical { param: String },

    #[error("training diverged (NaN loss) at epoch {epoch}, batch {batch}")]
    Diverged { epoch: usize, batch: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("degenerate batch: {0}")]
    DegenerateBatch(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("cannot match {target} parameters within 2%: closest is {closest} at width {width}")]
    Parity { target: usize, closest: usize, width: usize },

    #[error("{path}:{line}: {msg}")]
    Csv { path: String, line: u64, msg: String },

    #[error("graph `{function_id}`: {msg}")]
    Graph { function_id: String, msg: String },

    #[error("malformed input: {0}")]
    Format(String),

    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// True for errors caused by bad user input rather than a failure while running.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Config(_)
            | Error::Argument(_)
            | Error::Csv { .. }
            | Error::Graph { .. }
            | Error::Format(_)
            | Error::Parity { .. }
            | Error::Shape(_)
            | Error::DegenerateData(_) => true,
            Error::Fold { source, .. } => source.is_validation(),
            _ => false,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
