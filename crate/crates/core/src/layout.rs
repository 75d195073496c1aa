//! Qubit assignment for unrolled trajectories.
//!
//! Step `t` owns a contiguous block `[state, action, next, reward]`, blocks
//! ascend from qubit 0, and the return register sits on the top qubits.
//! Printing a basis index most-significant-first therefore reads: return,
//! then step `T-1` down to step 0, each as reward|next|action|state.

use crate::error::{CoreError, Result};
use crate::mdp::{bits_for, MdpSpec};
use crate::trajectory::Step;

/// A named register of the layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Register {
    State(usize),
    Action(usize),
    Next(usize),
    Reward(usize),
    Return,
}

/// Whether the layout carries a return register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReturnRegister {
    #[default]
    Include,
    Omit,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegisterLayout {
    n_s: usize,
    n_a: usize,
    n_r: usize,
    n_g: usize,
    steps: usize,
}

impl RegisterLayout {
    /// Layout for `spec` over `steps` time steps.
    pub fn new(spec: &MdpSpec, steps: usize, ret: ReturnRegister) -> Result<Self> {
        Self::from_widths(
            bits_for(spec.num_states()),
            bits_for(spec.num_actions()),
            spec.reward_bits(),
            steps,
            ret,
        )
    }

    pub fn from_widths(n_s: usize, n_a: usize, n_r: usize, steps: usize, ret: ReturnRegister) -> Result<Self> {
        if steps == 0 {
            return Err(CoreError::Config("at least one time step is required".into()));
        }
        if n_r == 0 || n_r >= 64 {
            return Err(CoreError::Config(format!("reward width {n_r} out of range")));
        }
        let n_g = match ret {
            ReturnRegister::Omit => 0,
            ReturnRegister::Include => {
                let max = (steps as u128) * ((1u128 << n_r) - 1);
                128 - max.leading_zeros() as usize
            }
        };
        let layout = Self { n_s, n_a, n_r, n_g, steps };
        if layout.num_qubits() > 64 {
            return Err(CoreError::TooManyQubits(layout.num_qubits()));
        }
        Ok(layout)
    }

    pub fn state_bits(&self) -> usize {
        self.n_s
    }

    pub fn action_bits(&self) -> usize {
        self.n_a
    }

    pub fn reward_bits(&self) -> usize {
        self.n_r
    }

    /// Zero when the return register is omitted.
    pub fn return_bits(&self) -> usize {
        self.n_g
    }

    pub fn has_return(&self) -> bool {
        self.n_g > 0
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn step_width(&self) -> usize {
        2 * self.n_s + self.n_a + self.n_r
    }

    pub fn num_qubits(&self) -> usize {
        self.steps * self.step_width() + self.n_g
    }

    /// Lowest qubit and width of a register.
    pub fn span(&self, reg: Register) -> Result<(usize, usize)> {
        let step_base = |t: usize| -> Result<usize> {
            if t >= self.steps {
                return Err(CoreError::OutOfRange(format!("step {t} of {}", self.steps)));
            }
            Ok(t * self.step_width())
        };
        Ok(match reg {
            Register::State(t) => (step_base(t)?, self.n_s),
            Register::Action(t) => (step_base(t)? + self.n_s, self.n_a),
            Register::Next(t) => (step_base(t)? + self.n_s + self.n_a, self.n_s),
            Register::Reward(t) => (step_base(t)? + 2 * self.n_s + self.n_a, self.n_r),
            Register::Return => {
                if self.n_g == 0 {
                    return Err(CoreError::NoReturnRegister);
                }
                (self.steps * self.step_width(), self.n_g)
            }
        })
    }

    /// Qubits of a register, least significant first.
    pub fn qubits(&self, reg: Register) -> Result<Vec<usize>> {
        let (lo, w) = self.span(reg)?;
        Ok((lo..lo + w).collect())
    }

    /// Value of a register inside a basis index.
    pub fn read(&self, index: u64, reg: Register) -> Result<u64> {
        let (lo, w) = self.span(reg)?;
        Ok(field(index, lo, w))
    }

    /// Basis index of a trajectory; `ret` is ignored when the register is omitted.
    pub fn encode(&self, steps: &[Step], ret: u64) -> Result<u64> {
        if steps.len() != self.steps {
            return Err(CoreError::LengthMismatch { expected: self.steps, got: steps.len() });
        }
        let mut index = 0u64;
        let mut put = |reg: Register, value: u64| -> Result<()> {
            let (lo, w) = self.span(reg)?;
            if w < 64 && value >> w != 0 {
                return Err(CoreError::PatternWidth { value, bits: w });
            }
            index |= value << lo;
            Ok(())
        };
        for (t, s) in steps.iter().enumerate() {
            put(Register::State(t), s.state as u64)?;
            put(Register::Action(t), s.action as u64)?;
            put(Register::Next(t), s.next as u64)?;
            put(Register::Reward(t), s.reward)?;
        }
        if self.has_return() {
            put(Register::Return, ret)?;
        }
        Ok(index)
    }

    /// Per-step fields and the return register value (the reward sum when omitted).
    pub fn decode(&self, index: u64) -> (Vec<Step>, u64) {
        let w = self.step_width();
        let steps: Vec<Step> = (0..self.steps)
            .map(|t| {
                let base = t * w;
                Step {
                    state: field(index, base, self.n_s) as usize,
                    action: field(index, base + self.n_s, self.n_a) as usize,
                    next: field(index, base + self.n_s + self.n_a, self.n_s) as usize,
                    reward: field(index, base + 2 * self.n_s + self.n_a, self.n_r),
                }
            })
            .collect();
        let ret = if self.has_return() {
            field(index, self.steps * w, self.n_g)
        } else {
            steps.iter().map(|s| s.reward).sum()
        };
        (steps, ret)
    }
}

fn field(index: u64, lo: usize, width: usize) -> u64 {
    if width == 0 {
        return 0;
    }
    let v = index >> lo;
    if width >= 64 {
        v
    } else {
        v & ((1u64 << width) - 1)
    }
}
