use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use crate::error::{Result, SimError};

/// A control condition: the gate fires only when `qubit` holds `bit`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Control {
    pub qubit: usize,
    pub bit: bool,
}

impl Control {
    pub fn new(qubit: usize, bit: bool) -> Self {
        Self { qubit, bit }
    }

    pub fn one(qubit: usize) -> Self {
        Self { qubit, bit: true }
    }

    pub fn zero(qubit: usize) -> Self {
        Self { qubit, bit: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateKind {
    H,
    X,
    /// `Ry(θ)|0⟩ = cos(θ/2)|0⟩ + sin(θ/2)|1⟩`.
    Ry(f64),
    /// Negates amplitudes whose target bit is 1 (a Z on the target).
    PhaseFlip,
}

impl GateKind {
    /// Real 2x2 matrix `[[m00, m01], [m10, m11]]` acting on the target bit.
    pub(crate) fn matrix(self) -> [[f64; 2]; 2] {
        match self {
            GateKind::H => [[FRAC_1_SQRT_2, FRAC_1_SQRT_2], [FRAC_1_SQRT_2, -FRAC_1_SQRT_2]],
            GateKind::X => [[0.0, 1.0], [1.0, 0.0]],
            GateKind::Ry(theta) => {
                let (s, c) = (theta / 2.0).sin_cos();
                [[c, -s], [s, c]]
            }
            GateKind::PhaseFlip => [[1.0, 0.0], [0.0, -1.0]],
        }
    }

    pub fn inverse(self) -> Self {
        match self {
            GateKind::Ry(theta) => GateKind::Ry(-theta),
            other => other,
        }
    }
}

/// A single-target gate with zero or more controls.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub target: usize,
    pub controls: Vec<Control>,
}

impl Gate {
    pub fn new(kind: GateKind, target: usize, controls: Vec<Control>) -> Self {
        Self { kind, target, controls }
    }

    pub fn h(target: usize) -> Self {
        Self::new(GateKind::H, target, Vec::new())
    }

    pub fn x(target: usize) -> Self {
        Self::new(GateKind::X, target, Vec::new())
    }

    pub fn ry(theta: f64, target: usize) -> Self {
        Self::new(GateKind::Ry(theta), target, Vec::new())
    }

    pub fn z(target: usize) -> Self {
        Self::new(GateKind::PhaseFlip, target, Vec::new())
    }

    pub fn cx(control: usize, target: usize) -> Self {
        Self::new(GateKind::X, target, vec![Control::one(control)])
    }

    pub fn with_controls(mut self, controls: impl IntoIterator<Item = Control>) -> Self {
        self.controls.extend(controls);
        self
    }

    pub fn inverse(&self) -> Self {
        Self { kind: self.kind.inverse(), target: self.target, controls: self.controls.clone() }
    }

    /// Checks indices against `num_qubits` and that all qubits are distinct.
    pub fn validate(&self, num_qubits: usize) -> Result<()> {
        let check = |q: usize| {
            if q >= num_qubits {
                Err(SimError::QubitOutOfRange { qubit: q, num_qubits })
            } else {
                Ok(())
            }
        };
        check(self.target)?;
        let mut seen = 1u64 << self.target;
        for c in &self.controls {
            check(c.qubit)?;
            let bit = 1u64 << c.qubit;
            if seen & bit != 0 {
                return Err(SimError::DuplicateQubit(c.qubit));
            }
            seen |= bit;
        }
        Ok(())
    }

    /// `(mask, value)` such that the gate fires on index `i` iff `i & mask == value`.
    pub(crate) fn control_mask(&self) -> (u64, u64) {
        self.controls.iter().fold((0, 0), |(mask, value), c| {
            let bit = 1u64 << c.qubit;
            (mask | bit, if c.bit { value | bit } else { value })
        })
    }
}

impl fmt::Display for Gate {
    /// `<kind>(<θ?>) target=<q> controls=[<q>:<bit>,…]`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            GateKind::H => write!(f, "h")?,
            GateKind::X => write!(f, "x")?,
            GateKind::Ry(theta) => write!(f, "ry({theta})")?,
            GateKind::PhaseFlip => write!(f, "phaseflip")?,
        }
        write!(f, " target={} controls=[", self.target)?;
        for (i, c) in self.controls.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}:{}", c.qubit, u8::from(c.bit))?;
        }
        write!(f, "]")
    }
}

/// An ordered gate list over a fixed register width.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Circuit {
    num_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Self {
        Self { num_qubits, gates: Vec::new() }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.num_qubits)?;
        self.gates.push(gate);
        Ok(())
    }

    /// Appends all gates of `other`, which must have the same width.
    pub fn append(&mut self, other: &Circuit) -> Result<()> {
        if other.num_qubits != self.num_qubits {
            return Err(SimError::WidthMismatch { circuit: other.num_qubits, state: self.num_qubits });
        }
        self.gates.extend(other.gates.iter().cloned());
        Ok(())
    }

    /// Appends gates negating every basis state that matches `pattern`.
    ///
    /// A phase flip needs one qubit required to be 1; when the pattern has
    /// none, the first qubit is conjugated by X. An empty pattern yields the
    /// global phase -1, written as `(XZ)²` on qubit 0.
    pub fn push_pattern_flip(&mut self, pattern: &[Control]) -> Result<()> {
        if pattern.is_empty() {
            if self.num_qubits == 0 {
                return Err(SimError::NoQubits);
            }
            for _ in 0..2 {
                self.push(Gate::z(0))?;
                self.push(Gate::x(0))?;
            }
            return Ok(());
        }
        let pivot = pattern.iter().position(|c| c.bit).unwrap_or(0);
        let target = pattern[pivot].qubit;
        let flip_target = !pattern[pivot].bit;
        let controls: Vec<Control> =
            pattern.iter().enumerate().filter(|&(i, _)| i != pivot).map(|(_, c)| *c).collect();
        if flip_target {
            self.push(Gate::x(target))?;
        }
        self.push(Gate::new(GateKind::PhaseFlip, target, controls))?;
        if flip_target {
            self.push(Gate::x(target))?;
        }
        Ok(())
    }

    /// Reverses gate order and inverts each gate.
    pub fn inverse(&self) -> Circuit {
        Circuit {
            num_qubits: self.num_qubits,
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
        }
    }

    /// One gate per line in the `Display` format.
    pub fn to_listing(&self) -> String {
        let mut out = String::new();
        for g in &self.gates {
            out.push_str(&g.to_string());
            out.push('\n');
        }
        out
    }
}

impl Extend<Gate> for Circuit {
    /// Appends gates without validation; `apply_circuit` still checks them.
    fn extend<I: IntoIterator<Item = Gate>>(&mut self, iter: I) {
        self.gates.extend(iter);
    }
}
