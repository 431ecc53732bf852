use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed header {path}: {reason}")]
    Header { path: PathBuf, reason: String },

    #[error("dimension mismatch: expected {expected} values, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("wavelengths must be strictly increasing (index {index})")]
    NonIncreasingWavelengths { index: usize },

    #[error("invalid sample value {value} at index {index}")]
    InvalidValue { index: usize, value: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("image too small: {0}")]
    ImageTooSmall(String),

    #[error("not enough data: {0}")]
    InsufficientData(String),

    #[error("singular fit: {0}")]
    SingularFit(String),

    #[error("invalid labels: {0}")]
    Labels(String),

    #[error("invalid manifest: {0}")]
    Manifest(String),

    #[error("no spectral overlap between cube ({cube_lo}-{cube_hi} nm) and response curves ({resp_lo}-{resp_hi} nm)")]
    NoSpectralOverlap {
        cube_lo: f64,
        cube_hi: f64,
        resp_lo: f64,
        resp_hi: f64,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
