use thiserror::Error;

#[derive(Debug, Error)]
pub enum MptError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("mesh error: {0}")]
    Mesh(String),
    #[error("tet {index} has non-positive volume {volume:e}")]
    InvertedTet { index: usize, volume: f64 },
    #[error("linear solver failed: {0}")]
    Solver(String),
    #[error("iterative solver did not converge after {iterations} iterations (last residual {last:e})")]
    NonConvergence { iterations: usize, last: f64, history: Vec<f64> },
    #[error("at {frequency_hz} Hz: {source}")]
    AtFrequency {
        frequency_hz: f64,
        #[source]
        source: Box<MptError>,
    },
    #[error("rank-deficient design: {0}")]
    RankDeficient(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl MptError {
    /// Process exit code: 2 for bad input, 1 for computation failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            MptError::InvalidArgument(_) | MptError::Config(_) | MptError::Json(_) => 2,
            MptError::Mesh(_) | MptError::InvertedTet { .. } | MptError::Io { .. } => 2,
            MptError::AtFrequency { source, .. } => source.exit_code(),
            _ => 1,
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        MptError::Io { path: path.as_ref().display().to_string(), source }
    }
}

pub type Result<T> = std::result::Result<T, MptError>;

pub(crate) fn invalid(msg: impl Into<String>) -> MptError {
    MptError::InvalidArgument(msg.into())
}
