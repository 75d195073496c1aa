//! Finite MDPs compiled into trajectory-preparation circuits.
//!
//! A [`PreparedModel`] holds the unitary that maps `|0…0⟩` to a superposition
//! of every length-`T` trajectory of an MDP under uniformly random actions,
//! with per-step rewards and the undiscounted return written into qubit
//! registers. [`grover`] amplifies trajectories with a chosen return, and
//! [`baseline`] provides the classical enumerator, value iteration and
//! Q-learning used to check the quantum side.

pub mod baseline;
pub mod circuit;
mod error;
pub mod grover;
pub mod layout;
pub mod mdp;
pub mod trajectory;

pub use circuit::{build_preparation, theta_for, PreparedModel};
pub use error::{CoreError, Result};
pub use layout::{Register, RegisterLayout, ReturnRegister};
pub use mdp::{Initial, MdpSpec, Transition, Violation};
pub use trajectory::{Step, TrajectoryRecord};

pub use qmdp_qsim as qsim;
