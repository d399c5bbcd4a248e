//! Error type shared by the whole crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied argument violated a precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An unknown model or component name.
    #[error("not found: {0}")]
    NotFound(String),

    /// A value outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical integral failed to converge.
    #[error("divergent integral: {0}")]
    Divergence(String),

    /// A lag or grid cell outside the validity region of a distributional
    /// covariance.
    #[error("validity error: {0}")]
    Validity(String),

    /// A density blew up on a cell that is not tagged as singular.
    #[error("singularity: {0}")]
    Singularity(String),

    /// The requested operation has no implementation for this model.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// The model has no stationary solution, so the request is refused.
    #[error("no stationary solution: {0}")]
    NonExistent(String),

    #[error("malformed file: {0}")]
    MalformedFile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
