use crate::error::Result;
use crate::layout::{RegisterLayout, ReturnRegister};
use crate::mdp::{Initial, MdpSpec};
use crate::trajectory::{Step, TrajectoryRecord};
use qmdp_qsim::bitstring;

/// Every trajectory with nonzero probability under uniformly random actions,
/// sorted by canonical bit string.
///
/// Bit strings use the layout with a return register.
pub fn enumerate_trajectories(spec: &MdpSpec, steps: usize, initial: Initial) -> Result<Vec<TrajectoryRecord>> {
    enumerate_with(spec, steps, initial, ReturnRegister::Include)
}

pub fn enumerate_with(
    spec: &MdpSpec,
    steps: usize,
    initial: Initial,
    ret: ReturnRegister,
) -> Result<Vec<TrajectoryRecord>> {
    spec.validate().map_err(crate::CoreError::Invalid)?;
    let layout = RegisterLayout::new(spec, steps, ret)?;
    let action_p = 1.0 / spec.num_actions() as f64;
    let mut out = Vec::new();
    let mut path = Vec::with_capacity(steps);
    for s0 in 0..spec.num_states() {
        let p = spec.start_prob(initial, s0);
        if p > 0.0 {
            walk(spec, &layout, action_p, s0, p, &mut path, &mut out)?;
        }
    }
    out.sort_by(|a, b| a.bitstring.cmp(&b.bitstring));
    Ok(out)
}

fn walk(
    spec: &MdpSpec,
    layout: &RegisterLayout,
    action_p: f64,
    state: usize,
    p: f64,
    path: &mut Vec<Step>,
    out: &mut Vec<TrajectoryRecord>,
) -> Result<()> {
    if path.len() == layout.steps() {
        let ret = path.iter().map(|s| s.reward).sum();
        let index = layout.encode(path, ret)?;
        out.push(TrajectoryRecord {
            steps: path.clone(),
            ret,
            probability: p,
            count: 0,
            bitstring: bitstring(index, layout.num_qubits()),
        });
        return Ok(());
    }
    for action in 0..spec.num_actions() {
        for (next, q) in spec.support(state, action)? {
            path.push(Step { state, action, next, reward: spec.reward(next) });
            walk(spec, layout, action_p, next, p * action_p * q, path, out)?;
            path.pop();
        }
    }
    Ok(())
}

/// `Σ probability · return`.
pub fn expected_return(records: &[TrajectoryRecord]) -> f64 {
    records.iter().map(|r| r.probability * r.ret as f64).sum()
}
