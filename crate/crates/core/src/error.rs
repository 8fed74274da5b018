use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Malformed or out-of-range input supplied by the caller.
    #[error("invalid input: {0}")]
    Input(String),

    /// The instance exceeds a configured size bound.
    #[error("instance too large: {0}")]
    TooLarge(String),

    /// A promised property (typically: the weights isolate a matching) did not hold.
    #[error("promise violation: {0}")]
    PromiseViolation(String),

    /// A caller invoked an operation outside its contract.
    #[error("contract violation: {0}")]
    Contract(String),

    /// A shortest-path query was issued on a graph with a non-positive cycle.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Tape contents could not be restored.
    #[error("tape corruption: {0}")]
    Corruption(String),

    /// Should be unreachable for valid inputs; indicates a bug.
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub fn is_promise_violation(&self) -> bool {
        matches!(self, Error::PromiseViolation(_))
    }
}

macro_rules! input_err {
    ($($arg:tt)*) => { $crate::error::Error::Input(format!($($arg)*)) };
}
pub(crate) use input_err;
