use qmdp_qsim::SimError;
use thiserror::Error;

use crate::mdp::Violation;

pub type Result<T> = std::result::Result<T, CoreError>;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid MDP: {}", join(.0))]
    Invalid(Vec<Violation>),
    #[error("index out of range: {0}")]
    OutOfRange(String),
    #[error("probability {0} outside [0, 1]")]
    Probability(f64),
    #[error("uniform start needs a power-of-two state count, got {0}")]
    UniformNotPowerOfTwo(usize),
    #[error("action count {0} is not a power of two")]
    ActionsNotPowerOfTwo(usize),
    #[error("layout needs {0} qubits, more than the 64-bit basis index allows")]
    TooManyQubits(usize),
    #[error("bit string has {got} bits, layout expects {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("the layout has no return register")]
    NoReturnRegister,
    #[error("value {value} does not fit in a {bits}-bit register")]
    PatternWidth { value: u64, bits: usize },
    #[error("degenerate probability {0}: need 0 < p < 1")]
    Degenerate(f64),
    #[error("invalid configuration: {0}")]
    Config(String),
}

fn join(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}
