use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("grid spacing {h} exceeds delta/4 = {limit}")]
    GridTooCoarse { h: f64, limit: f64 },

    #[error("grid spacing {actual} is too coarse for the recipe, need spacing <= {required}")]
    FeatureTooSmall { required: f64, actual: f64 },

    #[error("empty support")]
    EmptySupport,

    #[error("{} tube(s) with positive mass contain no rectangle inside the set: {tubes:?}", tubes.len())]
    LiftFailed { tubes: Vec<i64> },

    #[error("invalid tube measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("malformed input {path}: {reason}")]
    Malformed { path: PathBuf, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn malformed(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Malformed { path: path.into(), reason: reason.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
