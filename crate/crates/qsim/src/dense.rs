//! Dense gate kernels.
//!
//! Each gate touches only the `2^(n-1-c)` index pairs whose control bits
//! match, enumerated by inserting zero bits at the involved positions. Large
//! registers split that enumeration across rayon workers; every pair is owned
//! by exactly one worker, so results do not depend on the thread count.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::gate::{Gate, GateKind};

/// Below this many pairs a gate runs sequentially.
const PAR_PAIRS: usize = 1 << 14;

#[derive(Clone, Copy)]
struct SendPtr(*mut Complex64);

// SAFETY: workers write disjoint index pairs (see `apply`).
unsafe impl Send for SendPtr {}
unsafe impl Sync for SendPtr {}

impl SendPtr {
    fn get(self) -> *mut Complex64 {
        self.0
    }
}

/// Spreads the bits of `k` around zero bits at the ascending `positions`.
#[inline]
fn insert_zeros(mut k: u64, positions: &[u32]) -> u64 {
    for &p in positions {
        let low = k & ((1u64 << p) - 1);
        k = (k >> p) << (p + 1) | low;
    }
    k
}

pub(crate) fn apply(amps: &mut [Complex64], num_qubits: usize, gate: &Gate) {
    let (mask, value) = gate.control_mask();
    let tbit = 1u64 << gate.target;
    let mut positions: Vec<u32> = gate.controls.iter().map(|c| c.qubit as u32).collect();
    positions.push(gate.target as u32);
    positions.sort_unstable();
    let pairs = 1usize << (num_qubits - positions.len());
    let m = gate.kind.matrix();
    let kind = gate.kind;
    debug_assert_eq!(mask & tbit, 0);

    let ptr = SendPtr(amps.as_mut_ptr());
    // SAFETY: `insert_zeros` is injective in `k` and leaves the target bit
    // clear, so `i0 = base | value` and `i1 = i0 | tbit` are distinct for
    // distinct `k`, and both are < 2^n = amps.len().
    let kernel = move |k: usize| unsafe {
        let i0 = (insert_zeros(k as u64, &positions) | value) as usize;
        let i1 = i0 | tbit as usize;
        let p = ptr.get();
        match kind {
            GateKind::X => std::ptr::swap(p.add(i0), p.add(i1)),
            GateKind::PhaseFlip => *p.add(i1) = -*p.add(i1),
            GateKind::H | GateKind::Ry(_) => {
                let a0 = *p.add(i0);
                let a1 = *p.add(i1);
                *p.add(i0) = a0 * m[0][0] + a1 * m[0][1];
                *p.add(i1) = a0 * m[1][0] + a1 * m[1][1];
            }
        }
    };
    if pairs >= PAR_PAIRS {
        (0..pairs).into_par_iter().with_min_len(1 << 12).for_each(kernel);
    } else {
        (0..pairs).for_each(kernel);
    }
}
