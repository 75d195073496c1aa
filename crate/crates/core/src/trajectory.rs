//! Decoded trajectories and the trajectory CSV format.

use std::io::{self, Write};

use qmdp_qsim::{bitstring, parse_bitstring};
use serde::Serialize;

use crate::error::{CoreError, Result};
use crate::layout::RegisterLayout;
use crate::mdp::{Initial, MdpSpec};

/// One `(s, a, s', r)` interaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Step {
    pub state: usize,
    pub action: usize,
    pub next: usize,
    pub reward: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryRecord {
    pub steps: Vec<Step>,
    #[serde(rename = "return")]
    pub ret: u64,
    pub probability: f64,
    pub count: u64,
    pub bitstring: String,
}

impl TrajectoryRecord {
    pub fn final_state(&self) -> Option<usize> {
        self.steps.last().map(|s| s.next)
    }

    /// `(s0,a0,s2,2)(s2,a1,s3,3)` style summary.
    pub fn describe(&self) -> String {
        self.steps
            .iter()
            .map(|s| format!("(s{},a{},s{},{})", s.state, s.action, s.next, s.reward))
            .collect()
    }
}

/// Probability of `steps` when actions are drawn uniformly.
pub fn path_probability(spec: &MdpSpec, initial: Initial, steps: &[Step]) -> f64 {
    let Some(first) = steps.first() else { return 0.0 };
    if first.state >= spec.num_states() {
        return 0.0;
    }
    let mut p = spec.start_prob(initial, first.state);
    let mut prev: Option<usize> = None;
    for s in steps {
        if prev.is_some_and(|n| n != s.state) || s.action >= spec.num_actions() {
            return 0.0;
        }
        p *= spec.prob(s.state, s.action, s.next) / spec.num_actions() as f64;
        prev = Some(s.next);
    }
    p
}

/// Record for a basis index; the probability follows the model's own start distribution.
pub fn record_for_index(layout: &RegisterLayout, spec: &MdpSpec, index: u64) -> TrajectoryRecord {
    let (steps, ret) = layout.decode(index);
    TrajectoryRecord {
        probability: path_probability(spec, spec.initial(), &steps),
        steps,
        ret,
        count: 0,
        bitstring: bitstring(index, layout.num_qubits()),
    }
}

/// Splits a printed basis string into its trajectory fields.
pub fn decode_trajectory(layout: &RegisterLayout, spec: &MdpSpec, bits: &str) -> Result<TrajectoryRecord> {
    if bits.len() != layout.num_qubits() {
        return Err(CoreError::LengthMismatch { expected: layout.num_qubits(), got: bits.len() });
    }
    let index = parse_bitstring(bits)?;
    Ok(record_for_index(layout, spec, index))
}

/// Most probable first, then by bit string.
pub fn sort_for_output(records: &mut [TrajectoryRecord]) {
    records.sort_by(|a, b| {
        b.probability.total_cmp(&a.probability).then_with(|| a.bitstring.cmp(&b.bitstring))
    });
}

/// Writes `bitstring,return,prob,count,s0,a0,sp0,r0,...` rows in output order.
pub fn write_csv<W: Write>(mut out: W, records: &[TrajectoryRecord], steps: usize) -> io::Result<()> {
    let mut header = String::from("bitstring,return,prob,count");
    for t in 0..steps {
        header.push_str(&format!(",s{t},a{t},sp{t},r{t}"));
    }
    writeln!(out, "{header}")?;
    let mut sorted = records.to_vec();
    sort_for_output(&mut sorted);
    for r in &sorted {
        write!(out, "{},{},{},{}", r.bitstring, r.ret, r.probability, r.count)?;
        for s in &r.steps {
            write!(out, ",{},{},{},{}", s.state, s.action, s.next, s.reward)?;
        }
        writeln!(out)?;
    }
    Ok(())
}
