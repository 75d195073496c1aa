use super::argmax;
use crate::mdp::MdpSpec;

/// Finite-horizon optimal values and policies.
///
/// `values[k][s]` is the optimal return with `k` steps left and
/// `policy[k - 1][s]` the action taken there.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueIteration {
    pub values: Vec<Vec<f64>>,
    pub policy: Vec<Vec<usize>>,
    pub q: Vec<Vec<Vec<f64>>>,
}

impl ValueIteration {
    pub fn horizon(&self) -> usize {
        self.policy.len()
    }

    /// Values with the full horizon remaining.
    pub fn first_values(&self) -> &[f64] {
        &self.values[self.horizon()]
    }

    /// Policy for the first step of the horizon.
    pub fn first_policy(&self) -> &[usize] {
        &self.policy[self.horizon() - 1]
    }
}

/// Undiscounted backup `V_{k+1}(s) = max_a Σ P(s'|s,a)(r(s') + V_k(s'))`.
pub fn value_iteration(spec: &MdpSpec, horizon: usize) -> ValueIteration {
    let n = spec.num_states();
    let mut values = vec![vec![0.0; n]];
    let mut policy = Vec::with_capacity(horizon);
    let mut q_all = Vec::with_capacity(horizon);
    for k in 0..horizon {
        let prev = &values[k];
        let q: Vec<Vec<f64>> = (0..n)
            .map(|s| {
                (0..spec.num_actions())
                    .map(|a| {
                        spec.transitions()
                            .iter()
                            .filter(|t| t.state == s && t.action == a)
                            .map(|t| t.prob * (spec.reward(t.next) as f64 + prev[t.next]))
                            .sum()
                    })
                    .collect()
            })
            .collect();
        let pi: Vec<usize> = q.iter().map(|row| argmax(row)).collect();
        values.push(q.iter().zip(&pi).map(|(row, &a)| row[a]).collect());
        policy.push(pi);
        q_all.push(q);
    }
    ValueIteration { values, policy, q: q_all }
}
