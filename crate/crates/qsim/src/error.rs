use thiserror::Error;

pub type Result<T> = std::result::Result<T, SimError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("a register needs at least one qubit")]
    NoQubits,
    #[error("{requested} qubits exceeds the dense backend limit of {limit}")]
    Capacity { requested: usize, limit: usize },
    #[error("{requested} qubits exceeds the 64-bit basis index")]
    IndexWidth { requested: usize },
    #[error("qubit {qubit} out of range for a {num_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },
    #[error("qubit {0} appears more than once in a gate or pattern")]
    DuplicateQubit(usize),
    #[error("circuit width {circuit} does not match state width {state}")]
    WidthMismatch { circuit: usize, state: usize },
    #[error("amplitude vector of length {0} is not a power of two")]
    BadLength(usize),
    #[error("shots must be at least 1")]
    NoShots,
    #[error("state has zero norm")]
    ZeroNorm,
    #[error("invalid bit string {0:?}")]
    BadBitstring(String),
}
