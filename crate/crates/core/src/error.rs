use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A caller broke a documented precondition (index range, lengths, ...).
    #[error("contract violation: {0}")]
    Contract(String),
    /// Invalid user-facing configuration (grid, boundary values, generator flags).
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("PCG breakdown at iteration {iteration}: {reason}")]
    Breakdown { iteration: usize, reason: String },
    #[error("matrix is not symmetric positive definite")]
    NotSpd,
    #[error("dense oracle limited to {limit} unknowns, got {size}")]
    TooLarge { size: usize, limit: usize },
}

macro_rules! contract {
    ($($arg:tt)*) => { $crate::Error::Contract(alloc::format!($($arg)*)) };
}
macro_rules! config {
    ($($arg:tt)*) => { $crate::Error::Config(alloc::format!($($arg)*)) };
}
pub(crate) use {config, contract};
