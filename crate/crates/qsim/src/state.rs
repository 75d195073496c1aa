use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Result, SimError};
use crate::gate::{Circuit, Control, Gate};
use crate::sparse::AmpMap;
use crate::{bitstring, dense, sparse};

/// Largest register the dense backend accepts (1 GiB of 16-byte amplitudes).
pub const DENSE_QUBIT_LIMIT: usize = 26;

/// Sparse entries with `|amplitude|` below this are dropped after each gate.
pub const PRUNE_THRESHOLD: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Backend {
    Dense,
    #[default]
    Sparse,
}

impl std::str::FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "dense" => Ok(Backend::Dense),
            "sparse" => Ok(Backend::Sparse),
            other => Err(format!("unknown backend {other:?} (expected dense|sparse)")),
        }
    }
}

#[derive(Debug, Clone)]
enum Repr {
    Dense(Vec<Complex64>),
    Sparse(AmpMap),
}

/// Complex amplitudes over `num_qubits` qubits.
#[derive(Debug, Clone)]
pub struct Statevector {
    num_qubits: usize,
    repr: Repr,
}

fn check_width(num_qubits: usize, backend: Backend) -> Result<()> {
    if num_qubits == 0 {
        return Err(SimError::NoQubits);
    }
    if num_qubits > 64 {
        return Err(SimError::IndexWidth { requested: num_qubits });
    }
    if backend == Backend::Dense && num_qubits > DENSE_QUBIT_LIMIT {
        return Err(SimError::Capacity { requested: num_qubits, limit: DENSE_QUBIT_LIMIT });
    }
    Ok(())
}

impl Statevector {
    /// `|0…0⟩` on the chosen backend.
    pub fn zero(num_qubits: usize, backend: Backend) -> Result<Self> {
        Self::basis(num_qubits, backend, 0)
    }

    /// The computational basis state `|index⟩`.
    pub fn basis(num_qubits: usize, backend: Backend, index: u64) -> Result<Self> {
        check_width(num_qubits, backend)?;
        if num_qubits < 64 && index >> num_qubits != 0 {
            return Err(SimError::QubitOutOfRange { qubit: 63 - index.leading_zeros() as usize, num_qubits });
        }
        let repr = match backend {
            Backend::Dense => {
                let mut v = vec![Complex64::new(0.0, 0.0); 1usize << num_qubits];
                v[index as usize] = Complex64::new(1.0, 0.0);
                Repr::Dense(v)
            }
            Backend::Sparse => Repr::Sparse(AmpMap::from([(index, Complex64::new(1.0, 0.0))])),
        };
        Ok(Self { num_qubits, repr })
    }

    /// Builds a state from explicit `(index, amplitude)` entries. No normalization.
    pub fn from_entries(
        num_qubits: usize,
        backend: Backend,
        entries: impl IntoIterator<Item = (u64, Complex64)>,
    ) -> Result<Self> {
        check_width(num_qubits, backend)?;
        let mut state = Self::basis(num_qubits, backend, 0)?;
        match &mut state.repr {
            Repr::Dense(v) => {
                v[0] = Complex64::new(0.0, 0.0);
                for (i, a) in entries {
                    let slot = v.get_mut(i as usize).ok_or(SimError::BadLength(i as usize))?;
                    *slot += a;
                }
            }
            Repr::Sparse(m) => {
                m.clear();
                for (i, a) in entries {
                    if num_qubits < 64 && i >> num_qubits != 0 {
                        return Err(SimError::BadLength(i as usize));
                    }
                    *m.entry(i).or_default() += a;
                }
                sparse::prune(m);
            }
        }
        Ok(state)
    }

    /// Wraps a full dense amplitude vector.
    pub fn from_dense(amps: Vec<Complex64>) -> Result<Self> {
        if !amps.len().is_power_of_two() || amps.len() < 2 {
            return Err(SimError::BadLength(amps.len()));
        }
        let num_qubits = amps.len().trailing_zeros() as usize;
        check_width(num_qubits, Backend::Dense)?;
        Ok(Self { num_qubits, repr: Repr::Dense(amps) })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn backend(&self) -> Backend {
        match self.repr {
            Repr::Dense(_) => Backend::Dense,
            Repr::Sparse(_) => Backend::Sparse,
        }
    }

    pub fn amplitude(&self, index: u64) -> Complex64 {
        match &self.repr {
            Repr::Dense(v) => v.get(index as usize).copied().unwrap_or_default(),
            Repr::Sparse(m) => m.get(&index).copied().unwrap_or_default(),
        }
    }

    /// Entries with `|amplitude| >= PRUNE_THRESHOLD`, ascending by basis index.
    pub fn nonzero(&self) -> Vec<(u64, Complex64)> {
        match &self.repr {
            Repr::Dense(v) => v
                .iter()
                .enumerate()
                .filter(|(_, a)| a.norm() >= PRUNE_THRESHOLD)
                .map(|(i, a)| (i as u64, *a))
                .collect(),
            Repr::Sparse(m) => {
                let mut out: Vec<_> = m.iter().map(|(i, a)| (*i, *a)).collect();
                out.sort_unstable_by_key(|e| e.0);
                out
            }
        }
    }

    /// Number of stored amplitudes (all `2^n` for dense).
    pub fn stored_len(&self) -> usize {
        match &self.repr {
            Repr::Dense(v) => v.len(),
            Repr::Sparse(m) => m.len(),
        }
    }

    /// `Σ|a|²`, summed sequentially in ascending index order.
    pub fn norm_sqr(&self) -> f64 {
        match &self.repr {
            Repr::Dense(v) => v.iter().map(|a| a.norm_sqr()).sum(),
            Repr::Sparse(_) => self.nonzero().iter().map(|(_, a)| a.norm_sqr()).sum(),
        }
    }

    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.num_qubits)?;
        match &mut self.repr {
            Repr::Dense(v) => dense::apply(v, self.num_qubits, gate),
            Repr::Sparse(m) => sparse::apply(m, gate),
        }
        Ok(())
    }

    pub fn apply_circuit(&mut self, circuit: &Circuit) -> Result<()> {
        if circuit.num_qubits() != self.num_qubits {
            return Err(SimError::WidthMismatch { circuit: circuit.num_qubits(), state: self.num_qubits });
        }
        for gate in circuit.gates() {
            self.apply(gate)?;
        }
        Ok(())
    }

    /// Negates every amplitude whose basis index matches all of `pattern`.
    /// An empty pattern negates the whole state.
    pub fn phase_flip(&mut self, pattern: &[Control]) -> Result<()> {
        let mut mask = 0u64;
        let mut value = 0u64;
        for c in pattern {
            if c.qubit >= self.num_qubits {
                return Err(SimError::QubitOutOfRange { qubit: c.qubit, num_qubits: self.num_qubits });
            }
            let bit = 1u64 << c.qubit;
            if mask & bit != 0 {
                return Err(SimError::DuplicateQubit(c.qubit));
            }
            mask |= bit;
            if c.bit {
                value |= bit;
            }
        }
        match &mut self.repr {
            Repr::Dense(v) => {
                for (i, a) in v.iter_mut().enumerate() {
                    if i as u64 & mask == value {
                        *a = -*a;
                    }
                }
            }
            Repr::Sparse(m) => {
                for (i, a) in m.iter_mut() {
                    if i & mask == value {
                        *a = -*a;
                    }
                }
            }
        }
        Ok(())
    }

    /// Copies the amplitudes into the other backend.
    pub fn to_backend(&self, backend: Backend) -> Result<Self> {
        if backend == self.backend() {
            return Ok(self.clone());
        }
        Self::from_entries(self.num_qubits, backend, self.nonzero())
    }

    /// Largest `|a - b|` over all basis indices.
    pub fn max_abs_diff(&self, other: &Statevector) -> f64 {
        let mut idx: Vec<u64> = self.nonzero().into_iter().map(|e| e.0).collect();
        idx.extend(other.nonzero().into_iter().map(|e| e.0));
        idx.sort_unstable();
        idx.dedup();
        idx.into_iter()
            .map(|i| (self.amplitude(i) - other.amplitude(i)).norm())
            .fold(0.0, f64::max)
    }

    /// Euclidean distance `‖a − b‖₂`.
    pub fn l2_distance(&self, other: &Statevector) -> f64 {
        let mut idx: Vec<u64> = self.nonzero().into_iter().map(|e| e.0).collect();
        idx.extend(other.nonzero().into_iter().map(|e| e.0));
        idx.sort_unstable();
        idx.dedup();
        idx.into_iter()
            .map(|i| (self.amplitude(i) - other.amplitude(i)).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Statevector) -> Complex64 {
        self.nonzero().iter().map(|(i, a)| a.conj() * other.amplitude(*i)).sum()
    }

    /// Debug dump: one `<bitstring> <re> <im>` line per nonzero amplitude.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (i, a) in self.nonzero() {
            let _ = writeln!(out, "{} {} {}", bitstring(i, self.num_qubits), a.re, a.im);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    use super::*;

    fn both() -> [Backend; 2] {
        [Backend::Dense, Backend::Sparse]
    }

    #[test]
    fn zero_state() {
        let s = Statevector::zero(1, Backend::Dense).unwrap();
        assert_eq!(s.amplitude(0), Complex64::new(1.0, 0.0));
        assert_eq!(s.amplitude(1), Complex64::new(0.0, 0.0));
        let s = Statevector::zero(3, Backend::Sparse).unwrap();
        assert_eq!(s.nonzero(), vec![(0, Complex64::new(1.0, 0.0))]);
        assert_eq!(s.stored_len(), 1);
    }

    #[test]
    fn capacity_errors() {
        assert_eq!(
            Statevector::zero(31, Backend::Dense).unwrap_err(),
            SimError::Capacity { requested: 31, limit: DENSE_QUBIT_LIMIT }
        );
        assert!(Statevector::zero(27, Backend::Dense).is_err());
        assert!(Statevector::zero(40, Backend::Sparse).is_ok());
        assert_eq!(Statevector::zero(0, Backend::Sparse).unwrap_err(), SimError::NoQubits);
    }

    #[test]
    fn hadamard_on_zero() {
        for b in both() {
            let mut s = Statevector::zero(1, b).unwrap();
            s.apply(&Gate::h(0)).unwrap();
            assert!((s.amplitude(0).re - FRAC_1_SQRT_2).abs() < 1e-15);
            assert!((s.amplitude(1).re - FRAC_1_SQRT_2).abs() < 1e-15);
        }
    }

    #[test]
    fn ry_pi_flips() {
        for b in both() {
            let mut s = Statevector::zero(1, b).unwrap();
            s.apply(&Gate::ry(PI, 0)).unwrap();
            assert!(s.amplitude(0).norm() < 1e-15);
            assert!((s.amplitude(1).re - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn ry_convention_probabilities() {
        let theta = 1.1;
        for b in both() {
            let mut s = Statevector::zero(1, b).unwrap();
            s.apply(&Gate::ry(theta, 0)).unwrap();
            assert!((s.amplitude(0).re - (theta / 2.0).cos()).abs() < 1e-15);
            assert!((s.amplitude(1).re - (theta / 2.0).sin()).abs() < 1e-15);
        }
    }

    #[test]
    fn cnot_truth_table() {
        for b in both() {
            // q0 = 1, q1 = 0 → index 1
            let mut s = Statevector::basis(2, b, 0b01).unwrap();
            s.apply(&Gate::cx(0, 1)).unwrap();
            assert_eq!(s.nonzero()[0].0, 0b11);
            let mut s = Statevector::basis(2, b, 0b10).unwrap();
            s.apply(&Gate::cx(0, 1)).unwrap();
            assert_eq!(s.nonzero()[0].0, 0b10);
        }
    }

    #[test]
    fn zero_controls_fire_on_zero() {
        for b in both() {
            let g = Gate::x(2).with_controls([Control::zero(0), Control::one(1)]);
            let mut s = Statevector::basis(3, b, 0b010).unwrap();
            s.apply(&g).unwrap();
            assert_eq!(s.nonzero()[0].0, 0b110);
            let mut s = Statevector::basis(3, b, 0b011).unwrap();
            s.apply(&g).unwrap();
            assert_eq!(s.nonzero()[0].0, 0b011);
        }
    }

    #[test]
    fn phase_flip_patterns() {
        for b in both() {
            let mut s = Statevector::zero(2, b).unwrap();
            s.apply(&Gate::h(0)).unwrap();
            s.apply(&Gate::h(1)).unwrap();
            s.phase_flip(&[Control::one(0), Control::one(1)]).unwrap();
            let amps: Vec<f64> = (0..4).map(|i| s.amplitude(i).re).collect();
            for (got, want) in amps.iter().zip([0.5, 0.5, 0.5, -0.5]) {
                assert!((got - want).abs() < 1e-15);
            }

            let before = s.clone();
            s.phase_flip(&[]).unwrap();
            for i in 0..4 {
                assert_eq!(s.amplitude(i), -before.amplitude(i));
            }

            let mut z = Statevector::zero(2, b).unwrap();
            z.phase_flip(&[Control::one(1)]).unwrap();
            assert_eq!(z.amplitude(0), Complex64::new(1.0, 0.0));

            assert_eq!(
                z.phase_flip(&[Control::one(0), Control::zero(0)]),
                Err(SimError::DuplicateQubit(0))
            );
        }
    }

    #[test]
    fn pattern_flip_gates_match_direct_flip() {
        let patterns: Vec<Vec<Control>> = vec![
            vec![],
            vec![Control::zero(0), Control::zero(1), Control::zero(2)],
            vec![Control::one(2), Control::zero(0)],
            vec![Control::zero(1)],
        ];
        for pattern in patterns {
            for b in both() {
                let mut s = Statevector::zero(3, b).unwrap();
                for q in 0..3 {
                    s.apply(&Gate::h(q)).unwrap();
                }
                s.apply(&Gate::ry(0.3, 1)).unwrap();
                let mut direct = s.clone();
                direct.phase_flip(&pattern).unwrap();
                let mut c = Circuit::new(3);
                c.push_pattern_flip(&pattern).unwrap();
                s.apply_circuit(&c).unwrap();
                assert!(s.max_abs_diff(&direct) < 1e-14, "pattern {pattern:?}");
            }
        }
    }

    #[test]
    fn width_mismatch() {
        let mut s = Statevector::zero(2, Backend::Sparse).unwrap();
        let c = Circuit::new(3);
        assert!(matches!(s.apply_circuit(&c), Err(SimError::WidthMismatch { .. })));
        assert!(matches!(s.apply(&Gate::h(2)), Err(SimError::QubitOutOfRange { .. })));
    }

    #[test]
    fn dump_format() {
        let mut s = Statevector::zero(2, Backend::Sparse).unwrap();
        s.apply(&Gate::x(1)).unwrap();
        assert_eq!(s.dump(), "10 1 0\n");
    }

    #[test]
    fn backend_parse() {
        assert_eq!("dense".parse::<Backend>().unwrap(), Backend::Dense);
        assert!("gpu".parse::<Backend>().is_err());
    }
}
