use alloc::string::String;

/// Errors raised by the samplers, oracles and closed forms.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Schedule parameters that would produce a turning probability outside `[0, 1]`.
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    /// An argument outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),
    /// Only the second and fourth moments have closed forms.
    #[error("unsupported moment order {0}")]
    UnsupportedMoment(u32),
    /// The exact computation would exceed its configured size cap.
    #[error("resource limit exceeded: {0}")]
    Resource(String),
}

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

macro_rules! domain {
    ($($arg:tt)*) => {
        $crate::Error::Domain(alloc::format!($($arg)*))
    };
}
pub(crate) use domain;
