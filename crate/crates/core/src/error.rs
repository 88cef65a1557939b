use thiserror::Error;

/// Errors raised by the counting kernels, norms and solvers.
#[derive(Debug, Error)]
pub enum Error {
    /// An input outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The request exceeds a configured size or memory bound.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// A numerical precondition (resolution, truncation, grid size) does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The time integrator produced a non-finite value.
    #[error("numerical blowup at step {step} (t = {t})")]
    Blowup { step: usize, t: f64 },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
