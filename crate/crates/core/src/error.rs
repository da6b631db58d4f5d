use crate::dataset::Quarter;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{source_name}: line {line}: {message}")]
    Parse { source_name: String, line: usize, message: String },

    #[error("{series}: duplicate observation for {quarter}")]
    DuplicateObservation { series: String, quarter: Quarter },

    #[error("{series}: dates are not strictly increasing at {quarter}")]
    Unordered { series: String, quarter: Quarter },

    #[error("series have no quarters in common")]
    NoOverlap,

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unknown rule preset `{0}` (expected taylor1993 or ols_fitted)")]
    UnknownPreset(String),

    #[error("design matrix is singular: column `{column}` is collinear with the preceding columns")]
    Singular { column: &'static str },

    #[error("training diverged at epoch {epoch}: loss became non-finite; try a smaller step size (mu = {mu})")]
    Diverged { epoch: usize, mu: f64 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("{}: {source}", path.display())]
    File { path: std::path::PathBuf, source: std::io::Error },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Singular designs and diverged training are numeric failures; everything
    /// else is a data or input problem.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::Singular { .. } | Error::Diverged { .. })
    }

    pub(crate) fn parse(source_name: &str, line: usize, message: impl Into<String>) -> Self {
        Error::Parse { source_name: source_name.to_string(), line, message: message.into() }
    }
}
