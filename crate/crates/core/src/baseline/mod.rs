//! Classical ground truth for the quantum side.

mod enumerate;
mod qlearning;
mod value_iteration;

pub use enumerate::{enumerate_trajectories, enumerate_with, expected_return};
pub use qlearning::{greedy_rollouts, q_learning, q_update, QTable, QlConfig, Rollout};
pub use value_iteration::{value_iteration, ValueIteration};

/// Index of the largest value; ties go to the lower index.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Renders a policy as `s0:a0 s1:a1 ...`.
pub fn policy_line(policy: &[usize]) -> String {
    policy
        .iter()
        .enumerate()
        .map(|(s, a)| format!("s{s}:a{a}"))
        .collect::<Vec<_>>()
        .join(" ")
}
