use thiserror::Error;

/// Errors raised by the performance models, planners and simulators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Two objects that must agree on the number of pairs do not.
    #[error("dimension mismatch: expected {expected} pairs, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    /// No parameter choice meets the requested target.
    #[error("infeasible: {0}")]
    Infeasible(String),
    /// Explicit enumeration was asked to exceed its configured cap.
    #[error("enumeration cap exceeded: {requested} entries requested, cap is {cap}")]
    CapExceeded { requested: u64, cap: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
