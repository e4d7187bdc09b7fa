use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter {name}: {constraint}")]
    InvalidParameter { name: String, constraint: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported kernel: {0}")]
    UnsupportedKernel(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("hypothesis ({hypothesis}) violated: {detail}")]
    HypothesisViolated { hypothesis: String, detail: String },

    #[error("divergent integral: {0}")]
    Divergence(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("paths live on different grids")]
    GridMismatch,

    #[error("check failed: {0}")]
    CheckFailed(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn param(name: &str, constraint: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.to_string(),
            constraint: constraint.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
