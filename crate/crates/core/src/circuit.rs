//! Compilation of an MDP into the trajectory-preparation circuit.

use qmdp_qsim::{Backend, Circuit, Control, Gate, Statevector};

use crate::error::{CoreError, Result};
use crate::layout::{Register, RegisterLayout, ReturnRegister};
use crate::mdp::{Initial, MdpSpec, Transition};
use crate::trajectory::{record_for_index, TrajectoryRecord};

/// Rotation angle with `sin²(θ/2) = p`.
pub fn theta_for(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(CoreError::Probability(p));
    }
    Ok(2.0 * p.sqrt().asin())
}

/// Controls requiring `qubits` to hold `value` (bit `k` of `value` on `qubits[k]`).
fn pattern(qubits: &[usize], value: u64) -> impl Iterator<Item = Control> + '_ {
    qubits.iter().enumerate().map(move |(k, &q)| Control::new(q, value >> k & 1 == 1))
}

fn check_spec(spec: &MdpSpec) -> Result<()> {
    spec.validate().map_err(CoreError::Invalid)?;
    if !spec.num_actions().is_power_of_two() {
        return Err(CoreError::ActionsNotPowerOfTwo(spec.num_actions()));
    }
    Ok(())
}

/// Start-state preparation on step 0 plus Hadamards on every action qubit.
pub fn build_init(layout: &RegisterLayout, spec: &MdpSpec, initial: Initial) -> Result<Circuit> {
    let mut c = Circuit::new(layout.num_qubits());
    let state = layout.qubits(Register::State(0))?;
    match initial {
        Initial::Uniform => {
            if !spec.num_states().is_power_of_two() {
                return Err(CoreError::UniformNotPowerOfTwo(spec.num_states()));
            }
            for &q in &state {
                c.push(Gate::h(q))?;
            }
        }
        Initial::Fixed(s) => {
            if s >= spec.num_states() {
                return Err(CoreError::OutOfRange(format!("start state {s}")));
            }
            for (k, &q) in state.iter().enumerate() {
                if s >> k & 1 == 1 {
                    c.push(Gate::x(q))?;
                }
            }
        }
    }
    for t in 0..layout.steps() {
        for q in layout.qubits(Register::Action(t))? {
            c.push(Gate::h(q))?;
        }
    }
    Ok(c)
}

/// Drives step `t`'s next-state register to `Σ √P(s'|s,a) |s'⟩` for every `(s, a)`.
///
/// Next-state bits are rotated from the most significant down, each
/// conditioned on `(s, a)` and the bits above it.
pub fn build_transition(layout: &RegisterLayout, spec: &MdpSpec, t: usize) -> Result<Circuit> {
    let mut c = Circuit::new(layout.num_qubits());
    let sq = layout.qubits(Register::State(t))?;
    let aq = layout.qubits(Register::Action(t))?;
    let nq = layout.qubits(Register::Next(t))?;
    let n = nq.len();
    for s in 0..spec.num_states() {
        for a in 0..spec.num_actions() {
            let row = spec.support(s, a)?;
            for bit in (0..n).rev() {
                for prefix in 0..1u64 << (n - 1 - bit) {
                    let above = |next: usize| (next as u64) >> (bit + 1) == prefix;
                    let total: f64 = row.iter().filter(|(x, _)| above(*x)).map(|(_, p)| p).sum();
                    if total <= 0.0 {
                        continue;
                    }
                    let ones: f64 = row
                        .iter()
                        .filter(|(x, _)| above(*x) && x >> bit & 1 == 1)
                        .map(|(_, p)| p)
                        .sum();
                    let theta = theta_for((ones / total).clamp(0.0, 1.0))?;
                    if theta == 0.0 {
                        continue;
                    }
                    let controls = pattern(&sq, s as u64)
                        .chain(pattern(&aq, a as u64))
                        .chain(pattern(&nq[bit + 1..], prefix));
                    c.push(Gate::ry(theta, nq[bit]).with_controls(controls))?;
                }
            }
        }
    }
    Ok(c)
}

/// Writes `rewards[next]` into step `t`'s reward register.
///
/// A reward bit that equals the same next-state bit for every state is a
/// single CNOT; other bits get one controlled X per next-state value.
pub fn build_reward(layout: &RegisterLayout, spec: &MdpSpec, t: usize) -> Result<Circuit> {
    let mut c = Circuit::new(layout.num_qubits());
    let nq = layout.qubits(Register::Next(t))?;
    let rq = layout.qubits(Register::Reward(t))?;
    for (b, &target) in rq.iter().enumerate() {
        let bit = |v: u64| v >> b & 1 == 1;
        let copies = b < nq.len()
            && (0..spec.num_states()).all(|v| bit(spec.reward(v)) == bit(v as u64));
        if copies {
            c.push(Gate::cx(nq[b], target))?;
            continue;
        }
        for v in 0..spec.num_states() {
            if bit(spec.reward(v)) {
                c.push(Gate::x(target).with_controls(pattern(&nq, v as u64)))?;
            }
        }
    }
    Ok(c)
}

/// Copies step `t`'s next state into step `t + 1`'s state register.
pub fn build_step_chain(layout: &RegisterLayout, t: usize) -> Result<Circuit> {
    if t + 1 >= layout.steps() {
        return Err(CoreError::OutOfRange(format!("no step after {t}")));
    }
    let mut c = Circuit::new(layout.num_qubits());
    let from = layout.qubits(Register::Next(t))?;
    let to = layout.qubits(Register::State(t + 1))?;
    for (&f, &g) in from.iter().zip(&to) {
        c.push(Gate::cx(f, g))?;
    }
    Ok(c)
}

/// Adds every reward register into the return register.
///
/// Reward bit `j` increments the return register from bit `j` upward: a
/// descending cascade of X gates on return bit `k`, controlled by the reward
/// bit and return bits `j..k`, then a CNOT onto return bit `j`.
pub fn build_return_adder(layout: &RegisterLayout) -> Result<Circuit> {
    let mut c = Circuit::new(layout.num_qubits());
    let g = layout.qubits(Register::Return)?;
    for t in 0..layout.steps() {
        for (j, &r) in layout.qubits(Register::Reward(t))?.iter().enumerate() {
            for k in (j + 1..g.len()).rev() {
                let controls = std::iter::once(Control::one(r)).chain(g[j..k].iter().map(|&q| Control::one(q)));
                c.push(Gate::x(g[k]).with_controls(controls))?;
            }
            c.push(Gate::cx(r, g[j]))?;
        }
    }
    Ok(c)
}

/// The compiled preparation unitary together with its layout and MDP.
///
/// `spec.initial()` is the start distribution the circuit was built for.
#[derive(Debug, Clone)]
pub struct PreparedModel {
    pub layout: RegisterLayout,
    pub circuit: Circuit,
    pub spec: MdpSpec,
}

/// Full preparation circuit with a return register.
pub fn build_preparation(spec: &MdpSpec, steps: usize, initial: Initial) -> Result<PreparedModel> {
    build_preparation_with(spec, steps, initial, ReturnRegister::Include)
}

pub fn build_preparation_with(
    spec: &MdpSpec,
    steps: usize,
    initial: Initial,
    ret: ReturnRegister,
) -> Result<PreparedModel> {
    check_spec(spec)?;
    let spec = spec.clone().with_initial(initial);
    let layout = RegisterLayout::new(&spec, steps, ret)?;
    let mut circuit = build_init(&layout, &spec, initial)?;
    for t in 0..steps {
        circuit.append(&build_transition(&layout, &spec, t)?)?;
        circuit.append(&build_reward(&layout, &spec, t)?)?;
        if t + 1 < steps {
            circuit.append(&build_step_chain(&layout, t)?)?;
        }
    }
    if layout.has_return() {
        circuit.append(&build_return_adder(&layout)?)?;
    }
    Ok(PreparedModel { layout, circuit, spec })
}

impl PreparedModel {
    pub fn num_qubits(&self) -> usize {
        self.layout.num_qubits()
    }

    pub fn initial(&self) -> Initial {
        self.spec.initial()
    }

    /// Runs the circuit on `|0…0⟩`.
    pub fn prepare(&self, backend: Backend) -> Result<Statevector> {
        let mut s = Statevector::zero(self.num_qubits(), backend)?;
        s.apply_circuit(&self.circuit)?;
        Ok(s)
    }

    pub fn record(&self, index: u64) -> TrajectoryRecord {
        record_for_index(&self.layout, &self.spec, index)
    }

    /// One record per nonzero basis state, carrying the measured probability.
    pub fn distribution(&self, state: &Statevector) -> Vec<TrajectoryRecord> {
        state
            .probabilities()
            .into_iter()
            .map(|(i, p)| TrajectoryRecord { probability: p, ..self.record(i) })
            .collect()
    }

    /// `P(next | state, action)` read back from a prepared state at step 0.
    ///
    /// Only `(state, action)` pairs with nonzero weight appear.
    pub fn conditional_transitions(&self, state: &Statevector) -> Result<Vec<Transition>> {
        let l = &self.layout;
        let sq = l.qubits(Register::State(0))?;
        let aq = l.qubits(Register::Action(0))?;
        let nq = l.qubits(Register::Next(0))?;
        let pair: Vec<usize> = sq.iter().chain(&aq).copied().collect();
        let triple: Vec<usize> = pair.iter().chain(&nq).copied().collect();
        let joint = state.marginal(&triple)?;
        let given = state.marginal(&pair)?;
        let split = |v: u64, w: usize| (v & ((1u64 << w) - 1), v >> w);
        Ok(joint
            .probs
            .iter()
            .map(|(&v, &p)| {
                let (s, rest) = split(v, sq.len());
                let (a, next) = split(rest, aq.len());
                Transition {
                    state: s as usize,
                    action: a as usize,
                    next: next as usize,
                    prob: p / given.prob(v & ((1u64 << pair.len()) - 1)),
                }
            })
            .collect())
    }
}
