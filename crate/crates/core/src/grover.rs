//! Amplitude amplification of trajectories with a chosen return.

use qmdp_qsim::{Backend, Circuit, Control, SampleCounts};
use serde::Serialize;

use crate::circuit::PreparedModel;
use crate::error::{CoreError, Result};
use crate::layout::{Register, RegisterLayout};
use crate::trajectory::Step;

/// Which basis states the oracle negates: return register equal to
/// `target_return`, plus every extra `(register, value)` constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleSpec {
    pub target_return: u64,
    pub constraints: Vec<(Register, u64)>,
}

impl OracleSpec {
    pub fn new(target_return: u64) -> Self {
        Self { target_return, constraints: Vec::new() }
    }

    pub fn with_constraint(mut self, reg: Register, value: u64) -> Self {
        self.constraints.push((reg, value));
        self
    }

    /// The oracle as one control per constrained qubit.
    pub fn pattern(&self, layout: &RegisterLayout) -> Result<Vec<Control>> {
        let mut out: Vec<Control> = Vec::new();
        let all = std::iter::once((Register::Return, self.target_return)).chain(self.constraints.iter().copied());
        for (reg, value) in all {
            let qubits = layout.qubits(reg)?;
            if qubits.len() < 64 && value >> qubits.len() != 0 {
                return Err(CoreError::PatternWidth { value, bits: qubits.len() });
            }
            for (k, q) in qubits.into_iter().enumerate() {
                if out.iter().any(|c| c.qubit == q) {
                    return Err(CoreError::Config(format!("register {reg:?} constrained twice")));
                }
                out.push(Control::new(q, value >> k & 1 == 1));
            }
        }
        Ok(out)
    }

    fn matcher(&self, layout: &RegisterLayout) -> Result<impl Fn(u64) -> bool> {
        let (mask, want) = self.pattern(layout)?.iter().fold((0u64, 0u64), |(m, v), c| {
            (m | 1 << c.qubit, v | u64::from(c.bit) << c.qubit)
        });
        Ok(move |i: u64| i & mask == want)
    }
}

/// Phase oracle negating every basis state that satisfies `oracle`.
pub fn build_oracle(layout: &RegisterLayout, oracle: &OracleSpec) -> Result<Circuit> {
    let mut c = Circuit::new(layout.num_qubits());
    c.push_pattern_flip(&oracle.pattern(layout)?)?;
    Ok(c)
}

/// Reflection `2|ψ⟩⟨ψ| − I` about the prepared state `|ψ⟩ = A|0…0⟩`.
pub fn build_diffuser(prepared: &PreparedModel) -> Result<Circuit> {
    let n = prepared.num_qubits();
    let mut c = prepared.circuit.inverse();
    let zeros: Vec<Control> = (0..n).map(Control::zero).collect();
    c.push_pattern_flip(&zeros)?;
    c.push_pattern_flip(&[])?;
    c.append(&prepared.circuit)?;
    Ok(c)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarkedTrajectory {
    pub bitstring: String,
    pub steps: Vec<Step>,
    #[serde(rename = "return")]
    pub ret: u64,
    pub p_before: f64,
    pub p_after: f64,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchReport {
    pub iterations: usize,
    pub p0: f64,
    pub p_after: f64,
    pub marked: Vec<MarkedTrajectory>,
    pub shots: u64,
    pub seed: u64,
    #[serde(skip)]
    pub counts: SampleCounts,
}

impl SearchReport {
    /// Marked trajectories by descending count, then bit string.
    pub fn ranked_by_count(&self) -> Vec<&MarkedTrajectory> {
        let mut v: Vec<_> = self.marked.iter().collect();
        v.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.bitstring.cmp(&b.bitstring)));
        v
    }
}

/// Prepares `|ψ⟩`, applies `iterations` rounds of oracle then diffuser and
/// samples the result; `shots == 0` skips sampling.
pub fn grover_search(
    prepared: &PreparedModel,
    oracle: &OracleSpec,
    iterations: usize,
    shots: u64,
    seed: u64,
    backend: Backend,
) -> Result<SearchReport> {
    let is_marked = oracle.matcher(&prepared.layout)?;
    let oracle_circuit = build_oracle(&prepared.layout, oracle)?;
    let diffuser = build_diffuser(prepared)?;
    let mut state = prepared.prepare(backend)?;
    let before: Vec<(u64, f64)> = state
        .probabilities()
        .into_iter()
        .filter(|&(i, _)| is_marked(i))
        .collect();
    for _ in 0..iterations {
        state.apply_circuit(&oracle_circuit)?;
        state.apply_circuit(&diffuser)?;
    }
    let counts = if shots == 0 {
        SampleCounts { num_qubits: state.num_qubits(), counts: Default::default(), shots, seed }
    } else {
        state.sample(shots, seed)?
    };
    let marked: Vec<MarkedTrajectory> = before
        .iter()
        .map(|&(i, p)| {
            let rec = prepared.record(i);
            MarkedTrajectory {
                bitstring: rec.bitstring,
                steps: rec.steps,
                ret: rec.ret,
                p_before: p,
                p_after: state.amplitude(i).norm_sqr(),
                count: counts.count(i),
            }
        })
        .collect();
    Ok(SearchReport {
        iterations,
        p0: marked.iter().fold(0.0, |acc, m| acc + m.p_before),
        p_after: marked.iter().fold(0.0, |acc, m| acc + m.p_after),
        marked,
        shots,
        seed,
        counts,
    })
}

/// `sin²((2k+1)·asin√p0)`.
pub fn amplified_probability(p0: f64, iterations: usize) -> f64 {
    let theta = p0.sqrt().asin();
    ((2 * iterations + 1) as f64 * theta).sin().powi(2)
}

/// Standard optimal round count `round(π/(4θ) − ½)`, at least 1.
pub fn iterations_hint(p0: f64) -> Result<usize> {
    if !(p0 > 0.0 && p0 < 1.0) {
        return Err(CoreError::Degenerate(p0));
    }
    let theta = p0.sqrt().asin();
    let k = (std::f64::consts::PI / (4.0 * theta) - 0.5).round();
    Ok((k as usize).max(1))
}

#[cfg(test)]
mod tests {
    use qmdp_qsim::{Gate, Statevector};

    use super::*;
    use crate::circuit::build_preparation;
    use crate::layout::ReturnRegister;
    use crate::mdp::{Initial, MdpSpec};

    #[test]
    fn hint_values() {
        assert_eq!(iterations_hint(0.0375).unwrap(), 4);
        assert_eq!(iterations_hint(0.17578125).unwrap(), 1);
        assert_eq!(iterations_hint(0.5).unwrap(), 1);
        assert!(iterations_hint(0.0).is_err());
        assert!(iterations_hint(1.0).is_err());
    }

    #[test]
    fn hint_is_best_neighbour() {
        for p0 in [0.0375, 0.17578125, 0.01, 0.001, 0.3] {
            let k = iterations_hint(p0).unwrap();
            let best = amplified_probability(p0, k);
            assert!(best >= amplified_probability(p0, k + 1), "p0 {p0}");
            if k > 1 {
                assert!(best >= amplified_probability(p0, k - 1), "p0 {p0}");
            }
        }
    }

    #[test]
    fn oracle_pattern_width() {
        let spec = MdpSpec::bundled();
        let l = RegisterLayout::new(&spec, 3, ReturnRegister::Include).unwrap();
        assert!(matches!(build_oracle(&l, &OracleSpec::new(16)), Err(CoreError::PatternWidth { .. })));
        let o = OracleSpec::new(8).with_constraint(Register::Next(2), 3);
        assert_eq!(o.pattern(&l).unwrap().len(), 6);
        let dup = OracleSpec::new(8).with_constraint(Register::Return, 8);
        assert!(dup.pattern(&l).is_err());
        let l1 = RegisterLayout::new(&spec, 1, ReturnRegister::Omit).unwrap();
        assert!(matches!(build_oracle(&l1, &OracleSpec::new(0)), Err(CoreError::NoReturnRegister)));
    }

    #[test]
    fn diffuser_fixes_prepared_state() {
        let m = build_preparation(&MdpSpec::bundled(), 1, Initial::Uniform).unwrap();
        let psi = m.prepare(Backend::Sparse).unwrap();
        let mut s = psi.clone();
        s.apply_circuit(&build_diffuser(&m).unwrap()).unwrap();
        assert!(s.l2_distance(&psi) < 1e-9);
    }

    #[test]
    fn diffuser_on_single_hadamard() {
        let mut circuit = Circuit::new(1);
        circuit.push(Gate::h(0)).unwrap();
        let m = PreparedModel {
            layout: RegisterLayout::from_widths(0, 0, 1, 1, ReturnRegister::Omit).unwrap(),
            circuit,
            spec: MdpSpec::bundled(),
        };
        let mut minus = Statevector::basis(1, Backend::Dense, 1).unwrap();
        minus.apply(&Gate::h(0)).unwrap();
        let mut s = minus.clone();
        s.apply_circuit(&build_diffuser(&m).unwrap()).unwrap();
        assert!((s.inner(&minus).re + 1.0).abs() < 1e-12);
    }

    #[test]
    fn unreachable_target() {
        let m = build_preparation(&MdpSpec::bundled(), 3, Initial::Fixed(0)).unwrap();
        let r = grover_search(&m, &OracleSpec::new(15), 1, 10, 0, Backend::Sparse).unwrap();
        assert!(r.marked.is_empty());
        assert!(r.p0 == 0.0 && r.p0.is_sign_positive());
        assert_eq!(r.counts.counts.values().sum::<u64>(), 10);
    }
}
