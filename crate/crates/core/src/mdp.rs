//! Finite MDP definitions, validation and the JSON file format.

use std::collections::HashSet;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

const SUM_TOLERANCE: f64 = 1e-9;

/// One `P(next | state, action)` entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub state: usize,
    pub action: usize,
    pub next: usize,
    pub prob: f64,
}

/// Distribution of the first state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Initial {
    #[default]
    Uniform,
    Fixed(usize),
}

impl fmt::Display for Initial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Initial::Uniform => write!(f, "uniform"),
            Initial::Fixed(s) => write!(f, "fixed:{s}"),
        }
    }
}

impl std::str::FromStr for Initial {
    type Err = String;

    /// Accepts `uniform` or `fixed:<state>`.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if s == "uniform" {
            return Ok(Initial::Uniform);
        }
        s.strip_prefix("fixed:")
            .and_then(|n| n.parse().ok())
            .map(Initial::Fixed)
            .ok_or_else(|| format!("invalid start {s:?} (expected uniform or fixed:<state>)"))
    }
}

/// A problem found by [`MdpSpec::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NoStates,
    NoActions,
    IndexOutOfRange { state: usize, action: usize, next: usize },
    BadProbability { state: usize, action: usize, next: usize, prob: f64 },
    Duplicate { state: usize, action: usize, next: usize },
    RowSum { state: usize, action: usize, sum: f64 },
    RewardsLength { expected: usize, got: usize },
    RewardOverflow { next: usize, reward: u64, bits: usize },
    FixedStartOutOfRange(usize),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::NoStates => write!(f, "num_states must be positive"),
            Violation::NoActions => write!(f, "num_actions must be positive"),
            Violation::IndexOutOfRange { state, action, next } => {
                write!(f, "transition (s{state}, a{action}) -> s{next} has an index out of range")
            }
            Violation::BadProbability { state, action, next, prob } => {
                write!(f, "transition (s{state}, a{action}) -> s{next} has probability {prob} outside [0, 1]")
            }
            Violation::Duplicate { state, action, next } => {
                write!(f, "duplicate transition (s{state}, a{action}) -> s{next}")
            }
            Violation::RowSum { state, action, sum } => {
                write!(f, "probabilities for (s{state}, a{action}) sum to {sum}, not 1")
            }
            Violation::RewardsLength { expected, got } => {
                write!(f, "rewards has {got} entries, expected {expected}")
            }
            Violation::RewardOverflow { next, reward, bits } => {
                write!(f, "reward overflow: reward {reward} of s{next} needs more than {bits} bits")
            }
            Violation::FixedStartOutOfRange(s) => write!(f, "fixed start state {s} out of range"),
        }
    }
}

/// On-disk form; converted through [`MdpSpec::new`] so transitions come out sorted.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MdpDocument {
    num_states: usize,
    num_actions: usize,
    transitions: Vec<Transition>,
    rewards: Vec<u64>,
    initial: Initial,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reward_bits: Option<usize>,
}

/// A finite MDP with rewards on the next state.
///
/// Transitions are kept sorted by `(state, action, next)`, which makes the
/// saved form canonical and equality independent of input order.
#[derive(Debug, Clone, PartialEq)]
pub struct MdpSpec {
    num_states: usize,
    num_actions: usize,
    transitions: Vec<Transition>,
    rewards: Vec<u64>,
    initial: Initial,
    reward_bits: Option<usize>,
}

/// `ceil(log2(n))`, zero for `n <= 1`.
pub fn bits_for(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

impl MdpSpec {
    pub fn new(
        num_states: usize,
        num_actions: usize,
        mut transitions: Vec<Transition>,
        rewards: Vec<u64>,
        initial: Initial,
    ) -> Self {
        transitions.sort_by_key(|t| (t.state, t.action, t.next));
        Self { num_states, num_actions, transitions, rewards, initial, reward_bits: None }
    }

    /// The four-state, two-action example MDP.
    ///
    /// Support per `(s, a)`; rows not given explicitly split evenly:
    ///
    /// | s | a0            | a1          |
    /// |---|---------------|-------------|
    /// | 0 | s1 0.6, s2 0.4| s0, s1      |
    /// | 1 | s0, s1        | s2, s3      |
    /// | 2 | s0, s2        | s1, s3      |
    /// | 3 | s2, s3        | s3 1.0      |
    ///
    /// Rewards equal the next-state index.
    pub fn bundled() -> Self {
        let rows: [(usize, usize, &[(usize, f64)]); 8] = [
            (0, 0, &[(1, 0.6), (2, 0.4)]),
            (0, 1, &[(0, 0.5), (1, 0.5)]),
            (1, 0, &[(0, 0.5), (1, 0.5)]),
            (1, 1, &[(2, 0.5), (3, 0.5)]),
            (2, 0, &[(0, 0.5), (2, 0.5)]),
            (2, 1, &[(1, 0.5), (3, 0.5)]),
            (3, 0, &[(2, 0.5), (3, 0.5)]),
            (3, 1, &[(3, 1.0)]),
        ];
        let transitions = rows
            .iter()
            .flat_map(|&(state, action, succ)| {
                succ.iter().map(move |&(next, prob)| Transition { state, action, next, prob })
            })
            .collect();
        Self::new(4, 2, transitions, vec![0, 1, 2, 3], Initial::Uniform)
    }

    /// A random MDP where every `(s, a)` row has between one and
    /// `num_states` successors with random weights.
    pub fn random<R: Rng + ?Sized>(
        num_states: usize,
        num_actions: usize,
        max_reward: u64,
        rng: &mut R,
    ) -> Self {
        let mut transitions = Vec::new();
        for state in 0..num_states {
            for action in 0..num_actions {
                let mut nexts: Vec<usize> = (0..num_states).filter(|_| rng.gen_bool(0.6)).collect();
                if nexts.is_empty() {
                    nexts.push(rng.gen_range(0..num_states));
                }
                let weights: Vec<f64> = nexts.iter().map(|_| rng.gen_range(0.05..1.0)).collect();
                let total: f64 = weights.iter().sum();
                transitions.extend(nexts.iter().zip(&weights).map(|(&next, w)| Transition {
                    state,
                    action,
                    next,
                    prob: w / total,
                }));
            }
        }
        let rewards = (0..num_states).map(|_| rng.gen_range(0..=max_reward)).collect();
        Self::new(num_states, num_actions, transitions, rewards, Initial::Uniform)
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn rewards(&self) -> &[u64] {
        &self.rewards
    }

    /// Reward for arriving in `next`.
    pub fn reward(&self, next: usize) -> u64 {
        self.rewards[next]
    }

    pub fn initial(&self) -> Initial {
        self.initial
    }

    pub fn with_initial(mut self, initial: Initial) -> Self {
        self.initial = initial;
        self
    }

    /// Declares the reward register width instead of deriving it.
    pub fn with_reward_bits(mut self, bits: usize) -> Self {
        self.reward_bits = Some(bits);
        self
    }

    /// Declared reward width, or `ceil(log2(max reward + 1))` with a minimum of 1.
    pub fn reward_bits(&self) -> usize {
        self.reward_bits.unwrap_or_else(|| {
            let max = self.rewards.iter().copied().max().unwrap_or(0);
            (64 - max.leading_zeros() as usize).max(1)
        })
    }

    /// Probability of the first state.
    pub fn start_prob(&self, initial: Initial, state: usize) -> f64 {
        match initial {
            Initial::Uniform => 1.0 / self.num_states as f64,
            Initial::Fixed(s) if s == state => 1.0,
            Initial::Fixed(_) => 0.0,
        }
    }

    /// All problems with the model; empty when valid.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.num_states == 0 {
            out.push(Violation::NoStates);
        }
        if self.num_actions == 0 {
            out.push(Violation::NoActions);
        }
        let mut seen = HashSet::new();
        let mut sums = vec![0.0; self.num_states * self.num_actions];
        for t in &self.transitions {
            let Transition { state, action, next, prob } = *t;
            if state >= self.num_states || action >= self.num_actions || next >= self.num_states {
                out.push(Violation::IndexOutOfRange { state, action, next });
                continue;
            }
            if !(0.0..=1.0).contains(&prob) {
                out.push(Violation::BadProbability { state, action, next, prob });
            }
            if !seen.insert((state, action, next)) {
                out.push(Violation::Duplicate { state, action, next });
            }
            sums[state * self.num_actions + action] += prob;
        }
        for state in 0..self.num_states {
            for action in 0..self.num_actions {
                let sum = sums[state * self.num_actions + action];
                if (sum - 1.0).abs() > SUM_TOLERANCE {
                    out.push(Violation::RowSum { state, action, sum });
                }
            }
        }
        if self.rewards.len() != self.num_states {
            out.push(Violation::RewardsLength { expected: self.num_states, got: self.rewards.len() });
        }
        let bits = self.reward_bits();
        for (next, &reward) in self.rewards.iter().enumerate() {
            if bits < 64 && reward >> bits != 0 {
                out.push(Violation::RewardOverflow { next, reward, bits });
            }
        }
        if let Initial::Fixed(s) = self.initial {
            if s >= self.num_states {
                out.push(Violation::FixedStartOutOfRange(s));
            }
        }
        out
    }

    pub fn validate(&self) -> std::result::Result<(), Vec<Violation>> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(v)
        }
    }

    /// Nonzero-probability successors of `(state, action)`, ascending by next state.
    pub fn support(&self, state: usize, action: usize) -> Result<Vec<(usize, f64)>> {
        if state >= self.num_states || action >= self.num_actions {
            return Err(CoreError::OutOfRange(format!("(s{state}, a{action})")));
        }
        Ok(self
            .transitions
            .iter()
            .filter(|t| t.state == state && t.action == action && t.prob > 0.0)
            .map(|t| (t.next, t.prob))
            .collect())
    }

    /// `P(next | state, action)`, zero when not listed.
    pub fn prob(&self, state: usize, action: usize, next: usize) -> f64 {
        self.transitions
            .iter()
            .find(|t| t.state == state && t.action == action && t.next == next)
            .map_or(0.0, |t| t.prob)
    }

    /// Parses and validates an MDP document.
    pub fn load(document: &str) -> Result<Self> {
        let doc: MdpDocument = serde_json::from_str(document)?;
        let mut spec = Self::new(doc.num_states, doc.num_actions, doc.transitions, doc.rewards, doc.initial);
        spec.reward_bits = doc.reward_bits;
        spec.validate().map_err(CoreError::Invalid)?;
        Ok(spec)
    }

    /// Canonical pretty-printed JSON; floats use the shortest exact form.
    pub fn save(&self) -> String {
        let doc = MdpDocument {
            num_states: self.num_states,
            num_actions: self.num_actions,
            transitions: self.transitions.clone(),
            rewards: self.rewards.clone(),
            initial: self.initial,
            reward_bits: self.reward_bits,
        };
        let mut out = serde_json::to_string_pretty(&doc).expect("MDP document serializes");
        out.push('\n');
        out
    }
}
