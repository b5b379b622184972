use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A caller-supplied value is out of range.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A matrix or projector set fails its algebraic precondition.
    #[error("validation failed: {0}")]
    Validation(String),

    /// The requested register would exceed the simulator's qubit budget.
    #[error("register of {requested} qubits exceeds capacity of {max}")]
    Capacity { requested: usize, max: usize },

    /// Two sequences that must have equal length do not.
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    /// A protocol step was invoked outside of its position in the step order.
    #[error("protocol step {attempted} invoked while session is at {current}")]
    OutOfOrder {
        attempted: &'static str,
        current: &'static str,
    },

    /// A logical measurement found the register outside the DFS codespace.
    #[error("state left the logical codespace during {0}")]
    CodespaceLeak(&'static str),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
