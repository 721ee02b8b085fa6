use thiserror::Error;

/// Errors raised across the library.
///
/// The CLI maps these onto process exit codes (see [`Error::exit_code`]).
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("evaluation at a pole: {0}")]
    Pole(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("outside validity window: {0}")]
    Validity(String),

    #[error("no convergence: {0}")]
    Convergence(String),

    #[error("numerical degeneracy: {0}")]
    Degenerate(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Domain(_) | Error::Contract(_) => 2,
            Error::Validity(_) | Error::Degenerate(_) => 3,
            Error::Convergence(_) | Error::Pole(_) => 4,
            Error::Io(_) => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
