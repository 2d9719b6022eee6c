use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid configuration (profile tables, grids, stability guards).
    #[error("configuration error: {0}")]
    Config(String),

    /// An iterative method failed to converge or a factorization broke down.
    #[error("numerical error: {message} (after {iterations} iterations, residual {residual:.3e})")]
    Numerical {
        message: String,
        iterations: usize,
        residual: f64,
    },

    /// Two objects that must live on the same grid do not.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A coefficient refers to a mode that is not available.
    #[error("index error: {0}")]
    Index(String),

    /// A mode of the wrong boundary-condition kind was supplied.
    #[error("type error: {0}")]
    Type(String),

    /// Time stepping produced a non-finite value.
    #[error("FDTD diverged at step {step}")]
    Divergence { step: usize },

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn numerical(message: impl Into<String>, iterations: usize, residual: f64) -> Self {
        Error::Numerical {
            message: message.into(),
            iterations,
            residual,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
