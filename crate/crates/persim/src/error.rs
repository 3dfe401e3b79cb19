use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument lies outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("insufficient subjects: need at least {required}, got {actual}")]
    InsufficientSubjects { required: usize, actual: usize },

    /// A feature column has zero variance where variation is required.
    #[error("degenerate feature {0:?}: zero variance")]
    DegenerateFeature(String),

    #[error("degenerate vector ({0}): zero norm")]
    DegenerateVector(String),

    #[error("degenerate scaling: all pooled distances are equal")]
    DegenerateScaling,

    #[error("empty distribution")]
    EmptyDistribution,

    #[error("unknown feature {0:?}")]
    UnknownFeature(String),

    #[error("unbalanced dataset: {0}")]
    Unbalanced(String),

    #[error("rank-deficient matrix: {deficient} of {columns} column directions carry no variance")]
    RankDeficient { deficient: usize, columns: usize },

    #[error("decomposition error: {0}")]
    Decomposition(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// Cell-level parse failure; `row` and `column` are 1-based file coordinates.
    #[error("{path}: row {row}, column {column}: {message}")]
    Parse {
        path: String,
        row: usize,
        column: usize,
        message: String,
    },

    #[error("format error: {0}")]
    Format(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Context { context: String, source: Box<Error> },
}

impl Error {
    /// Wraps the error with a locating prefix (e.g. band/repeat indices).
    pub fn with_context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
