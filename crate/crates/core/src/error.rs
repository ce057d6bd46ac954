use std::path::PathBuf;

use thiserror::Error;

/// Crate-wide error type.
///
/// The CLI maps variants onto exit codes: validation and domain errors
/// exit 1, integration failures exit 2, I/O errors exit 3.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violated one of its invariants.
    #[error("invalid {field}: {message}")]
    Validation { field: &'static str, message: String },

    /// An argument left the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Config file or key/value parsing failed.
    #[error("config: {0}")]
    Config(String),

    /// The ODE integrator could not complete a sweep.
    #[error("integration failed at t = {t}: {message}")]
    Integration { t: f64, message: String },

    /// Filesystem failure, with the offending path attached.
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn validation(field: &'static str, message: impl Into<String>) -> Self {
        Error::Validation {
            field,
            message: message.into(),
        }
    }

    /// Exit code for the CLI: 1 validation, 2 integration, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation { .. } | Error::Domain(_) | Error::Config(_) => 1,
            Error::Integration { .. } => 2,
            Error::Io { .. } => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
