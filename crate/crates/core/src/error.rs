use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed WAV file {path}: {reason}")]
    WavParse { path: PathBuf, reason: String },

    #[error("unsupported WAV format in {path}: {reason}")]
    UnsupportedFormat { path: PathBuf, reason: String },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("signal too short: {0}")]
    TooShort(String),

    #[error("noise clip {0} has zero power")]
    ZeroPower(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("coverage error: {} clip(s) missing: {}", missing.len(), missing.join(", "))]
    Coverage { missing: Vec<String> },

    #[error("degenerate training data: {0}")]
    DegenerateData(String),

    #[error("feature extraction failed for clip {clip}: {reason}")]
    Extraction { clip: String, reason: String },

    #[error("report error: {0}")]
    Report(String),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
