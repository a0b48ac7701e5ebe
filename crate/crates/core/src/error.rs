use std::path::PathBuf;

pub type Result<T, E = CamaError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum CamaError {
    /// An input lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The metric is not defined for this cohort (e.g. only one class present).
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("sample {0} not found")]
    NotFound(usize),

    /// |M_post - M_pre| is too small to normalize a gain curve.
    #[error("degenerate task: |m_post - m_pre| = {gap:e} is below the threshold")]
    Degenerate { gap: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    /// Malformed input file. `line` is 1-based and counts the header.
    #[error("{path}: line {line}: {message}")]
    Data {
        path: String,
        line: u64,
        message: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CamaError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CamaError::Io {
            path: path.into(),
            source,
        }
    }
}
