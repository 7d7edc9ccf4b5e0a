use thiserror::Error;

use crate::bootstrap::BootstrapError;
use crate::estimate::EstimateError;
use crate::evaluate::EvaluateError;
use crate::panel::PanelError;
use crate::qreg::QrError;
use crate::selectk::SelectKError;
use crate::sieve::SieveError;
use crate::spectral::SpectralError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification used for CLI exit codes and FFI status codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad invocation or configuration.
    Usage,
    /// Input data violates a precondition.
    Data,
    /// A numerical routine failed (rank deficiency, singular Gram matrix, ...).
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Panel(#[from] PanelError),
    #[error(transparent)]
    Sieve(#[from] SieveError),
    #[error(transparent)]
    Qr(#[from] QrError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Estimate(#[from] EstimateError),
    #[error(transparent)]
    SelectK(#[from] SelectKError),
    #[error(transparent)]
    Bootstrap(#[from] BootstrapError),
    #[error(transparent)]
    Evaluate(#[from] EvaluateError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Panel(_) | Error::Io { .. } => ErrorKind::Data,
            Error::Config(_) => ErrorKind::Usage,
            Error::Sieve(e) => match e {
                SieveError::NonFiniteInput | SieveError::DimensionMismatch { .. } => ErrorKind::Data,
                _ => ErrorKind::Usage,
            },
            Error::Qr(e) => e.kind(),
            Error::Spectral(e) => e.kind(),
            Error::Estimate(e) => e.kind(),
            Error::SelectK(_) => ErrorKind::Data,
            Error::Bootstrap(e) => e.kind(),
            Error::Evaluate(e) => e.kind(),
        }
    }
}
