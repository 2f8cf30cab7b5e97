use thiserror::Error;

/// Errors raised by the combinatorial, bracketing and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum VcError {
    /// An input is larger than the exhaustive routine accepts.
    #[error("size guard: {what} has size {size}, limit is {limit}")]
    SizeGuard {
        what: &'static str,
        size: usize,
        limit: usize,
    },
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A search ran out of its evaluation budget before finishing.
    #[error("budget exceeded: {bound} (limit {limit})")]
    Budget { bound: String, limit: u64 },
    /// A process or instance configuration is malformed.
    #[error("invalid configuration: {0}")]
    Config(String),
    /// A documented precondition of a construction does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),
    /// A post-condition check on a computed object failed.
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T, E = VcError> = std::result::Result<T, E>;
