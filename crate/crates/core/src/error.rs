//! Error taxonomy shared by the whole crate.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// Bad input: violated precondition, malformed spec string, etc.
    #[error("validation: {0}")]
    Validation(String),

    /// Input is structurally fine but exceeds a configured enumeration or
    /// size cap. Caps are enforced rather than silently truncated.
    #[error("resource limit: {0}")]
    Resource(String),

    /// Operation applied outside its mathematical domain
    /// (e.g. rotating a tree whose largest branch is already full).
    #[error("domain: {0}")]
    Domain(String),

    /// Floating-point computation left its trusted regime
    /// (singular pivot, negative kernel diagonal beyond roundoff, ...).
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
    pub fn resource(msg: impl Into<String>) -> Self {
        Error::Resource(msg.into())
    }
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}
