use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A kernel was evaluated at its singularity.
    #[error("{kernel} is singular at the origin")]
    Singular { kernel: &'static str },

    /// Two distinct samples coincide, so |L| = 0 somewhere.
    #[error("degenerate curve: samples {j} and {jp} coincide")]
    Degenerate { j: usize, jp: usize },

    #[error("curve is not positively oriented (signed area {area:.6e})")]
    Orientation { area: f64 },

    #[error("target point lies on the curve (sample {sample}); use the on-curve velocity instead")]
    OnCurve { sample: usize },

    #[error("well-stretched constant fell to {lambda:.6e} below the abort threshold {threshold:.6e} at t = {t}")]
    LambdaAbort { t: f64, lambda: f64, threshold: f64 },

    #[error("state became non-finite at t = {t}")]
    BlowUp { t: f64 },

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("malformed file {}: {message}", path.display())]
    Format { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::InvalidParameter { .. } | Error::Format { .. } => 2,
            Error::LambdaAbort { .. } => 3,
            Error::BlowUp { .. } | Error::NonFinite(_) => 4,
            Error::Io(_) => 1,
            _ => 4,
        }
    }
}
