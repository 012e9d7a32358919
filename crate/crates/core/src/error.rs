use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("symmetry error: {0}")]
    Symmetry(String),
    #[error("index error: {0}")]
    Index(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("structure error: {0}")]
    Structure(String),
    #[error("normalization error: {0}")]
    Normalization(String),
    #[error("positivity error: {0}")]
    Positivity(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("consistency error: {0}")]
    Consistency(String),
    #[error("scope error: {0}")]
    Scope(String),
    #[error("classification error: {0}")]
    Classification(String),
    #[error("usage error: {0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, Error>;
