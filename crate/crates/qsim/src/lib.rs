//! Statevector simulation for the trajectory circuits.
//!
//! Two interchangeable backends share one [`Statevector`] type: a dense array
//! of `2^n` amplitudes and a sparse map holding only nonzero amplitudes. Gates
//! are single-target with an arbitrary list of `(qubit, required bit)`
//! controls, which covers CNOT, Toffoli, multi-controlled X and controlled
//! rotations without decomposition.
//!
//! Bit convention: qubit 0 is the least significant bit of a basis index.
//! Printed bit strings are most-significant first.

mod dense;
mod error;
mod gate;
mod measure;
mod sparse;
mod state;

pub use error::{Result, SimError};
pub use gate::{Circuit, Control, Gate, GateKind};
pub use measure::{Marginal, SampleCounts};
pub use state::{Backend, Statevector, DENSE_QUBIT_LIMIT, PRUNE_THRESHOLD};

pub use num_complex::Complex64;

/// Formats `index` as a most-significant-first bit string of `width` bits.
pub fn bitstring(index: u64, width: usize) -> String {
    (0..width)
        .rev()
        .map(|q| if index >> q & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Parses a most-significant-first bit string into a basis index.
pub fn parse_bitstring(bits: &str) -> Result<u64> {
    if bits.len() > 64 {
        return Err(SimError::BadBitstring(bits.to_string()));
    }
    bits.chars().try_fold(0u64, |acc, c| match c {
        '0' => Ok(acc << 1),
        '1' => Ok(acc << 1 | 1),
        _ => Err(SimError::BadBitstring(bits.to_string())),
    })
}
