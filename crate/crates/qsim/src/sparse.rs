//! Sparse gate kernels over a basis-index → amplitude map.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::gate::{Gate, GateKind};
use crate::state::PRUNE_THRESHOLD;

pub(crate) type AmpMap = HashMap<u64, Complex64>;

pub(crate) fn apply(amps: &mut AmpMap, gate: &Gate) {
    let (mask, value) = gate.control_mask();
    let tbit = 1u64 << gate.target;
    match gate.kind {
        GateKind::PhaseFlip => {
            for (&i, a) in amps.iter_mut() {
                if i & mask == value && i & tbit != 0 {
                    *a = -*a;
                }
            }
        }
        GateKind::X => {
            let old = std::mem::take(amps);
            amps.reserve(old.len());
            for (i, a) in old {
                let j = if i & mask == value { i ^ tbit } else { i };
                amps.insert(j, a);
            }
        }
        GateKind::H | GateKind::Ry(_) => {
            let m = gate.kind.matrix();
            let old = std::mem::take(amps);
            amps.reserve(old.len() * 2);
            for (i, a) in old {
                if i & mask != value {
                    amps.insert(i, a);
                    continue;
                }
                // At most two contributions land on each index, so the
                // (commutative) sum is independent of map iteration order.
                let col = usize::from(i & tbit != 0);
                let base = i & !tbit;
                if m[0][col] != 0.0 {
                    *amps.entry(base).or_default() += a * m[0][col];
                }
                if m[1][col] != 0.0 {
                    *amps.entry(base | tbit).or_default() += a * m[1][col];
                }
            }
            prune(amps);
        }
    }
}

pub(crate) fn prune(amps: &mut AmpMap) {
    amps.retain(|_, a| a.norm() >= PRUNE_THRESHOLD);
}
