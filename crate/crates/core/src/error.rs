use thiserror::Error;

/// Failure classes shared by every module of the crate.
///
/// The split mirrors how callers react: a `Domain` error means the inputs
/// were outside an operation's contract, `Estimation` means the data could
/// not support the requested estimate, and `Numerical` means an internal
/// computation produced something unusable (a zero expected count, a
/// non-finite intermediate).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("estimation error: {0}")]
    Estimation(String),
    #[error("numerical error: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn ensure_finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        domain(format!("{name} must be finite, got {value}"))
    }
}
