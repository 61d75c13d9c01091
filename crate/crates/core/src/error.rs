use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid web ({kind}): {detail}")]
    InvalidWeb { kind: &'static str, detail: String },
    #[error("pattern mismatch: {0}")]
    Pattern(String),
    #[error("index out of range: {0}")]
    Index(String),
    #[error("enumeration frontier exceeded cap {cap} at {sigma}")]
    FrontierCap { cap: usize, sigma: String },
    #[error("solver failed: {0}")]
    Solver(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(kind: &'static str, detail: impl Into<String>) -> Self {
        Error::InvalidWeb { kind, detail: detail.into() }
    }
}
