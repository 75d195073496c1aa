//! Acceptance checks, one line per criterion. Exits nonzero if any fail.

use std::collections::BTreeSet;
use std::panic;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use qmdp_core::baseline::{enumerate_trajectories, policy_line, q_learning, value_iteration, QlConfig};
use qmdp_core::circuit::{build_preparation_with, build_return_adder};
use qmdp_core::grover::{amplified_probability, grover_search, OracleSpec};
use qmdp_core::qsim::{Backend, Circuit, Control, Gate, GateKind, Statevector};
use qmdp_core::{build_preparation, Initial, MdpSpec, RegisterLayout, ReturnRegister, Step};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = std::result::Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

/// Single-interaction basis strings, printed reward|next|action|state.
const SINGLE_STEP_CATALOG: [&str; 15] = [
    "0000001", "0000010", "0000100", "1010000", "1010010", "1010011", "1010101", "0101000",
    "0101001", "0101100", "0101110", "1111011", "1111101", "1111110", "1111111",
];

const SCENARIO_ONE_BEST: [&str; 2] = ["1000111111111111101010000", "1000111101111111101010000"];

/// `p(3 − 4p)²` at `p = 45/256`, the one-round amplified probability.
const SCENARIO_TWO_AFTER: f64 = 0.927_357_673_645_019_5;

fn single_interaction() -> Check {
    let spec = MdpSpec::bundled();
    let m = build_preparation_with(&spec, 1, Initial::Uniform, ReturnRegister::Omit).map_err(|e| e.to_string())?;
    let state = m.prepare(Backend::Sparse).map_err(|e| e.to_string())?;
    let got: BTreeSet<String> = state.nonzero().iter().map(|(i, _)| m.record(*i).bitstring).collect();
    let want: BTreeSet<String> = SINGLE_STEP_CATALOG.iter().map(|s| s.to_string()).collect();
    ensure!(got == want, "support differs: {:?}", got.symmetric_difference(&want).collect::<Vec<_>>());
    let table = m.conditional_transitions(&state).map_err(|e| e.to_string())?;
    let cond = |s, a, n| table.iter().find(|t| (t.state, t.action, t.next) == (s, a, n)).map_or(0.0, |t| t.prob);
    for (s, a, n, p) in [(0, 0, 1, 0.6), (0, 0, 2, 0.4), (3, 1, 3, 1.0)] {
        ensure!((cond(s, a, n) - p).abs() < 1e-9, "P(s{n}|s{s},a{a}) = {} not {p}", cond(s, a, n));
    }
    Ok(())
}

fn compare_to_enumerator(spec: &MdpSpec, steps: usize) -> Check {
    let m = build_preparation(spec, steps, Initial::Uniform).map_err(|e| e.to_string())?;
    let state = m.prepare(Backend::Sparse).map_err(|e| e.to_string())?;
    let records = enumerate_trajectories(spec, steps, Initial::Uniform).map_err(|e| e.to_string())?;
    let quantum = m.distribution(&state);
    ensure!(quantum.len() == records.len(), "{} quantum strings vs {} trajectories", quantum.len(), records.len());
    let mut worst = 0.0f64;
    for (q, c) in quantum.iter().zip(&records) {
        ensure!(q.bitstring == c.bitstring, "string {} vs {}", q.bitstring, c.bitstring);
        worst = worst.max((q.probability - c.probability).abs());
    }
    ensure!(worst <= 1e-9, "L-inf distance {worst:e}");
    Ok(())
}

fn oracle_equivalence() -> Check {
    for steps in 1..=3 {
        compare_to_enumerator(&MdpSpec::bundled(), steps).map_err(|e| format!("bundled T={steps}: {e}"))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for k in 0..50 {
        let spec = MdpSpec::random(4, 2, 3, &mut rng);
        ensure!(spec.validate().is_ok(), "random spec {k} invalid");
        for steps in 1..=2 {
            compare_to_enumerator(&spec, steps).map_err(|e| format!("random spec {k} T={steps}: {e}"))?;
        }
    }
    Ok(())
}

fn return_adder() -> Check {
    let layout = RegisterLayout::new(&MdpSpec::bundled(), 3, ReturnRegister::Include).map_err(|e| e.to_string())?;
    let adder = build_return_adder(&layout).map_err(|e| e.to_string())?;
    for code in 0..64u64 {
        let rewards = [code & 3, code >> 2 & 3, code >> 4 & 3];
        let trail: Vec<Step> = rewards.iter().map(|&r| Step { state: 0, action: 0, next: 0, reward: r }).collect();
        let start = layout.encode(&trail, 0).map_err(|e| e.to_string())?;
        let mut s = Statevector::basis(layout.num_qubits(), Backend::Sparse, start).map_err(|e| e.to_string())?;
        s.apply_circuit(&adder).map_err(|e| e.to_string())?;
        let nz = s.nonzero();
        ensure!(nz.len() == 1 && (nz[0].1.re - 1.0).abs() < 1e-12, "rewards {rewards:?}: not a basis state");
        let (out, g) = layout.decode(nz[0].0);
        ensure!(out == trail, "rewards {rewards:?}: reward registers changed");
        ensure!(g == rewards.iter().sum::<u64>(), "rewards {rewards:?}: return {g}");
    }
    Ok(())
}

fn scenario_one() -> Check {
    let spec = MdpSpec::bundled();
    let m = build_preparation(&spec, 3, Initial::Fixed(0)).map_err(|e| e.to_string())?;
    let r = grover_search(&m, &OracleSpec::new(8), 1, 1000, 1, Backend::Sparse).map_err(|e| e.to_string())?;
    let marked: BTreeSet<&str> = r.marked.iter().map(|t| t.bitstring.as_str()).collect();
    ensure!(marked == SCENARIO_ONE_BEST.into_iter().collect(), "marked set {marked:?}");
    ensure!((r.p0 - 0.0375).abs() <= 1e-9, "p0 = {}", r.p0);
    let law = amplified_probability(r.p0, 1);
    ensure!((r.p_after - law).abs() <= 1e-9, "p_after {} vs {law}", r.p_after);
    let mut top: Vec<(u64, u64)> = r.counts.counts.iter().map(|(i, c)| (*c, *i)).collect();
    top.sort_by(|a, b| b.cmp(a));
    let top2: BTreeSet<String> = top.iter().take(2).map(|&(_, i)| m.record(i).bitstring).collect();
    ensure!(top2 == SCENARIO_ONE_BEST.iter().map(|s| s.to_string()).collect(), "top-2 by count {top2:?}");
    let count = |b: &str| r.marked.iter().find(|t| t.bitstring == b).map_or(0, |t| t.count);
    let ratio = count(SCENARIO_ONE_BEST[0]) as f64 / count(SCENARIO_ONE_BEST[1]).max(1) as f64;
    ensure!((ratio - 2.0).abs() <= 0.35 * 2.0, "count ratio {ratio:.3}");
    Ok(())
}

fn scenario_two() -> Check {
    let m = build_preparation(&MdpSpec::bundled(), 3, Initial::Uniform).map_err(|e| e.to_string())?;
    let r = grover_search(&m, &OracleSpec::new(9), 1, 1000, 1, Backend::Sparse).map_err(|e| e.to_string())?;
    ensure!(r.marked.len() == 16, "{} marked", r.marked.len());
    ensure!(
        r.marked.iter().all(|t| t.steps.iter().all(|s| s.next == 3)),
        "a marked trajectory leaves s3"
    );
    ensure!((r.p0 - 0.17578125).abs() <= 1e-9, "p0 = {}", r.p0);
    ensure!((r.p_after - SCENARIO_TWO_AFTER).abs() <= 1e-6, "p_after = {}", r.p_after);
    Ok(())
}

fn policy_agreement() -> Check {
    let vi = value_iteration(&MdpSpec::bundled(), 3);
    let expected = [0, 1, 1, 1];
    ensure!(vi.first_policy() == expected, "value iteration policy {}", policy_line(vi.first_policy()));
    let run = |initial: Initial, want: &[usize]| -> (usize, Vec<String>) {
        let spec = MdpSpec::bundled().with_initial(initial);
        let policies: Vec<Vec<usize>> = (0..10)
            .map(|seed| q_learning(&spec, &QlConfig { seed, ..Default::default() }).unwrap().greedy_policy())
            .collect();
        let hits = policies.iter().filter(|p| p.as_slice() == want).count();
        let distinct: BTreeSet<String> = policies.iter().map(|p| policy_line(p)).collect();
        (hits, distinct.into_iter().collect())
    };
    let (hits, seen) = run(Initial::Fixed(0), &expected);
    ensure!(hits >= 9, "fixed start: {hits}/10 seeds match value iteration ({seen:?})");
    let (hits, seen) = run(Initial::Uniform, &[1, 1, 1, 1]);
    ensure!(hits >= 9, "uniform start: {hits}/10 seeds give the all-a1 policy ({seen:?})");
    Ok(())
}

fn random_circuit(rng: &mut ChaCha8Rng, max_qubits: usize, max_gates: usize) -> Circuit {
    let n = rng.gen_range(1..=max_qubits);
    let mut c = Circuit::new(n);
    for _ in 0..rng.gen_range(0..=max_gates) {
        let kind = match rng.gen_range(0..4) {
            0 => GateKind::H,
            1 => GateKind::X,
            2 => GateKind::PhaseFlip,
            _ => GateKind::Ry(rng.gen_range(-6.3..6.3)),
        };
        let mut qs: Vec<usize> = (0..n).collect();
        qs.shuffle(rng);
        let k = rng.gen_range(0..n.min(4));
        let controls = qs[1..=k].iter().map(|&q| Control::new(q, rng.gen_bool(0.5))).collect();
        c.push(Gate::new(kind, qs[0], controls)).expect("generated gate is valid");
    }
    c
}

fn simulator_properties() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let run = |c: &Circuit, b: Backend| {
        let mut s = Statevector::zero(c.num_qubits(), b).unwrap();
        s.apply_circuit(c).unwrap();
        s
    };
    for case in 0..250 {
        let c = random_circuit(&mut rng, 12, 200);
        let s = run(&c, Backend::Sparse);
        ensure!((s.norm_sqr() - 1.0).abs() <= 1e-9, "unitarity case {case}: norm {}", s.norm_sqr());
    }
    for case in 0..250 {
        let c = random_circuit(&mut rng, 12, 120);
        let d = run(&c, Backend::Dense);
        let s = run(&c, Backend::Sparse);
        ensure!(d.max_abs_diff(&s) <= 1e-9, "equivalence case {case}: {}", d.max_abs_diff(&s));
    }
    for case in 0..250 {
        let c = random_circuit(&mut rng, 10, 120);
        let mut start = Statevector::zero(c.num_qubits(), Backend::Dense).unwrap();
        for q in 0..c.num_qubits() {
            start.apply(&Gate::ry(rng.gen_range(0.0..6.3), q)).unwrap();
        }
        let mut s = start.clone();
        s.apply_circuit(&c).unwrap();
        s.apply_circuit(&c.inverse()).unwrap();
        ensure!(s.l2_distance(&start) <= 1e-9, "inverse case {case}: {}", s.l2_distance(&start));
    }
    for case in 0..250 {
        let c = random_circuit(&mut rng, 8, 60);
        let seed = rng.gen();
        let s = run(&c, Backend::Sparse);
        let a = s.sample(257, seed).unwrap();
        ensure!(a == s.sample(257, seed).unwrap(), "determinism case {case}: repeat differs");
        ensure!(a == run(&c, Backend::Dense).sample(257, seed).unwrap(), "determinism case {case}: backends differ");
        ensure!(a.counts.values().sum::<u64>() == 257, "determinism case {case}: counts");
    }
    Ok(())
}

fn peak_rss_bytes() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}

fn scale_check() -> Check {
    let m = build_preparation(&MdpSpec::bundled(), 3, Initial::Uniform).map_err(|e| e.to_string())?;
    ensure!(m.num_qubits() == 25, "{} qubits", m.num_qubits());
    let start = Instant::now();
    let sparse = grover_search(&m, &OracleSpec::new(9), 1, 1000, 1, Backend::Sparse).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(5), "sparse run took {elapsed:?}");
    let dense = grover_search(&m, &OracleSpec::new(9), 1, 1000, 1, Backend::Dense).map_err(|e| e.to_string())?;
    ensure!((dense.p_after - sparse.p_after).abs() <= 1e-9, "dense p_after {} vs sparse {}", dense.p_after, sparse.p_after);
    ensure!(dense.counts == sparse.counts, "dense and sparse samples differ");
    if let Some(peak) = peak_rss_bytes() {
        ensure!(peak <= 1 << 30, "peak resident memory {} MiB", peak >> 20);
    }
    Ok(())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check, Option<u64>); 8] = [
        ("single-interaction support", single_interaction, Some(1)),
        ("oracle equivalence", oracle_equivalence, Some(60)),
        ("return adder", return_adder, Some(1)),
        ("fixed-start Grover search", scenario_one, Some(30)),
        ("uniform-start Grover search", scenario_two, Some(30)),
        ("policy agreement", policy_agreement, Some(30)),
        ("simulator property suite", simulator_properties, Some(60)),
        ("25-qubit scale check", scale_check, None),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (k, (name, check, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(check).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|()| {
            match limit {
                Some(l) if elapsed > Duration::from_secs(*l) => Err(format!("took {elapsed:.2?}, limit {l} s")),
                _ => Ok(()),
            }
        });
        match outcome {
            Ok(()) => println!("PASS {} {name} ({elapsed:.2?})", k + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name} ({elapsed:.2?}): {why}", k + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} of {} criteria failed", criteria.len());
        ExitCode::FAILURE
    }
}
