use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, SimError};
use crate::state::{Statevector, PRUNE_THRESHOLD};
use crate::bitstring;

/// Probability of each bit pattern over an ordered qubit subset.
///
/// Pattern bit `k` is the value of `qubits[k]`; only patterns with nonzero
/// weight are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginal {
    pub qubits: Vec<usize>,
    pub probs: BTreeMap<u64, f64>,
}

impl Marginal {
    pub fn prob(&self, pattern: u64) -> f64 {
        self.probs.get(&pattern).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.probs.values().sum()
    }

    /// Patterns printed most-significant first (last listed qubit leftmost).
    pub fn by_bitstring(&self) -> BTreeMap<String, f64> {
        self.probs.iter().map(|(p, v)| (bitstring(*p, self.qubits.len()), *v)).collect()
    }
}

/// Measurement counts keyed by basis index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleCounts {
    pub num_qubits: usize,
    pub counts: BTreeMap<u64, u64>,
    pub shots: u64,
    pub seed: u64,
}

impl SampleCounts {
    pub fn count(&self, index: u64) -> u64 {
        self.counts.get(&index).copied().unwrap_or(0)
    }

    pub fn by_bitstring(&self) -> BTreeMap<String, u64> {
        self.counts.iter().map(|(i, c)| (bitstring(*i, self.num_qubits), *c)).collect()
    }
}

impl Statevector {
    /// Marginal distribution over `qubits`, in the given order.
    pub fn marginal(&self, qubits: &[usize]) -> Result<Marginal> {
        let mut seen = 0u64;
        for &q in qubits {
            if q >= self.num_qubits() {
                return Err(SimError::QubitOutOfRange { qubit: q, num_qubits: self.num_qubits() });
            }
            if seen >> q & 1 == 1 {
                return Err(SimError::DuplicateQubit(q));
            }
            seen |= 1 << q;
        }
        let mut probs = BTreeMap::new();
        for (i, a) in self.nonzero() {
            let pattern = qubits
                .iter()
                .enumerate()
                .fold(0u64, |acc, (k, &q)| acc | ((i >> q) & 1) << k);
            *probs.entry(pattern).or_insert(0.0) += a.norm_sqr();
        }
        Ok(Marginal { qubits: qubits.to_vec(), probs })
    }

    /// Full-register distribution, ascending by basis index.
    pub fn probabilities(&self) -> Vec<(u64, f64)> {
        self.nonzero().into_iter().map(|(i, a)| (i, a.norm_sqr())).collect()
    }

    /// Draws `shots` basis states by inverse CDF over ascending basis index.
    ///
    /// Output depends only on the amplitudes above the prune threshold,
    /// `shots` and `seed`; dense and sparse states with equal amplitudes give
    /// equal counts.
    pub fn sample(&self, shots: u64, seed: u64) -> Result<SampleCounts> {
        if shots == 0 {
            return Err(SimError::NoShots);
        }
        let entries: Vec<(u64, f64)> = self
            .nonzero()
            .into_iter()
            .map(|(i, a)| (i, a.norm_sqr()))
            .filter(|&(_, p)| p >= PRUNE_THRESHOLD * PRUNE_THRESHOLD)
            .collect();
        let mut cdf = Vec::with_capacity(entries.len());
        let mut acc = 0.0;
        for &(_, p) in &entries {
            acc += p;
            cdf.push(acc);
        }
        if acc <= 0.0 {
            return Err(SimError::ZeroNorm);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counts = BTreeMap::new();
        for _ in 0..shots {
            let u = rng.gen::<f64>() * acc;
            let k = cdf.partition_point(|&c| c <= u).min(entries.len() - 1);
            *counts.entry(entries[k].0).or_insert(0) += 1;
        }
        Ok(SampleCounts { num_qubits: self.num_qubits(), counts, shots, seed })
    }
}
