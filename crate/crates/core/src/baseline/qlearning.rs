use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::argmax;
use crate::error::{CoreError, Result};
use crate::mdp::{Initial, MdpSpec};
use crate::trajectory::Step;

/// Tabular Q-learning settings.
///
/// Episodes run for `horizon` steps from the model's start distribution and
/// the last step of each episode is terminal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QlConfig {
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub episodes: usize,
    pub horizon: usize,
    pub seed: u64,
}

impl Default for QlConfig {
    fn default() -> Self {
        Self { alpha: 0.02, gamma: 1.0, epsilon: 0.1, episodes: 20_000, horizon: 3, seed: 0 }
    }
}

impl QlConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(CoreError::Config(format!("alpha {} outside (0, 1]", self.alpha)));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(CoreError::Config(format!("gamma {} outside [0, 1]", self.gamma)));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(CoreError::Config(format!("epsilon {} outside [0, 1]", self.epsilon)));
        }
        if self.horizon == 0 {
            return Err(CoreError::Config("horizon must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QTable {
    pub values: Vec<Vec<f64>>,
}

impl QTable {
    pub fn zeros(num_states: usize, num_actions: usize) -> Self {
        Self { values: vec![vec![0.0; num_actions]; num_states] }
    }

    pub fn get(&self, state: usize, action: usize) -> f64 {
        self.values[state][action]
    }

    pub fn greedy(&self, state: usize) -> usize {
        argmax(&self.values[state])
    }

    /// Greedy action per state, ties to the lower action.
    pub fn greedy_policy(&self) -> Vec<usize> {
        (0..self.values.len()).map(|s| self.greedy(s)).collect()
    }

    pub fn max(&self, state: usize) -> f64 {
        self.values[state][self.greedy(state)]
    }

    /// `state,a0,a1,...` rows.
    pub fn to_csv(&self) -> String {
        let width = self.values.first().map_or(0, Vec::len);
        let mut out = String::from("state");
        for a in 0..width {
            out.push_str(&format!(",a{a}"));
        }
        out.push('\n');
        for (s, row) in self.values.iter().enumerate() {
            out.push_str(&format!("s{s}"));
            for v in row {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }
}

/// `Q(s,a) ← Q(s,a) + α(r + γ·max Q(s',·) − Q(s,a))`; no bootstrap when `next` is `None`.
pub fn q_update(q: &mut QTable, state: usize, action: usize, reward: f64, next: Option<usize>, alpha: f64, gamma: f64) {
    let boot = next.map_or(0.0, |n| gamma * q.max(n));
    let cell = &mut q.values[state][action];
    *cell += alpha * (reward + boot - *cell);
}

fn draw_start(spec: &MdpSpec, rng: &mut ChaCha8Rng) -> usize {
    match spec.initial() {
        Initial::Uniform => rng.gen_range(0..spec.num_states()),
        Initial::Fixed(s) => s,
    }
}

fn draw_next(row: &[(usize, f64)], rng: &mut ChaCha8Rng) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for &(next, p) in row {
        acc += p;
        if u < acc {
            return next;
        }
    }
    row.last().expect("support is never empty").0
}

/// Successor rows indexed `[state][action]`.
fn supports(spec: &MdpSpec) -> Result<Vec<Vec<Vec<(usize, f64)>>>> {
    (0..spec.num_states())
        .map(|s| (0..spec.num_actions()).map(|a| spec.support(s, a)).collect())
        .collect()
}

/// ε-greedy tabular Q-learning; deterministic for a given seed.
pub fn q_learning(spec: &MdpSpec, config: &QlConfig) -> Result<QTable> {
    spec.validate().map_err(CoreError::Invalid)?;
    config.validate()?;
    let rows = supports(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut q = QTable::zeros(spec.num_states(), spec.num_actions());
    for _ in 0..config.episodes {
        let mut s = draw_start(spec, &mut rng);
        for t in 0..config.horizon {
            let a = if rng.gen::<f64>() < config.epsilon {
                rng.gen_range(0..spec.num_actions())
            } else {
                q.greedy(s)
            };
            let next = draw_next(&rows[s][a], &mut rng);
            let terminal = t + 1 == config.horizon;
            q_update(&mut q, s, a, spec.reward(next) as f64, (!terminal).then_some(next), config.alpha, config.gamma);
            s = next;
        }
    }
    Ok(q)
}

/// A distinct greedy trajectory and how often it occurred.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Rollout {
    pub steps: Vec<Step>,
    pub total: u64,
    pub count: u64,
}

/// Follows the greedy policy for `trials` episodes; distinct trajectories
/// by descending total reward, then descending count.
pub fn greedy_rollouts(spec: &MdpSpec, q: &QTable, trials: usize, horizon: usize, seed: u64) -> Result<Vec<Rollout>> {
    spec.validate().map_err(CoreError::Invalid)?;
    let rows = supports(spec)?;
    let policy = q.greedy_policy();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen: BTreeMap<Vec<Step>, u64> = BTreeMap::new();
    for _ in 0..trials {
        let mut s = draw_start(spec, &mut rng);
        let mut steps = Vec::with_capacity(horizon);
        for _ in 0..horizon {
            let a = policy[s];
            let next = draw_next(&rows[s][a], &mut rng);
            steps.push(Step { state: s, action: a, next, reward: spec.reward(next) });
            s = next;
        }
        *seen.entry(steps).or_default() += 1;
    }
    let mut out: Vec<Rollout> = seen
        .into_iter()
        .map(|(steps, count)| Rollout { total: steps.iter().map(|s| s.reward).sum(), steps, count })
        .collect();
    out.sort_by(|a, b| b.total.cmp(&a.total).then(b.count.cmp(&a.count)).then_with(|| a.steps.cmp(&b.steps)));
    Ok(out)
}
