use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use qmdp_core::baseline::{
    enumerate_trajectories, expected_return, greedy_rollouts, policy_line, q_learning, QlConfig,
};
use qmdp_core::grover::{build_diffuser, build_oracle, grover_search, iterations_hint, OracleSpec};
use qmdp_core::qsim::Backend;
use qmdp_core::trajectory::write_csv;
use qmdp_core::{build_preparation, Initial, MdpSpec, Step, TrajectoryRecord};
use serde_json::json;

mod output;

use output::{bar_chart_svg, sibling, write};

/// Quantum MDP trajectory laboratory.
#[derive(Parser)]
#[command(name = "qmdp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Prepare the trajectory superposition and write its distribution.
    Simulate(SimulateArgs),
    /// Amplify trajectories with a target return.
    Search(SearchArgs),
    /// Classical catalog of every trajectory.
    Enumerate(CommonArgs),
    /// Tabular Q-learning with greedy rollouts.
    Qlearn(QlearnArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct CommonArgs {
    /// MDP file, or `bundled` for the built-in four-state example.
    #[arg(long, default_value = "bundled")]
    mdp: String,
    /// Horizon T.
    #[arg(long, default_value_t = 3)]
    steps: usize,
    /// `uniform` or `fixed:<state>`; defaults to the MDP file's own start.
    #[arg(long)]
    start: Option<Initial>,
    /// Main output file; secondary artifacts are written next to it.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct SamplingArgs {
    /// `dense` or `sparse`.
    #[arg(long, default_value = "sparse")]
    backend: Backend,
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Write the executed circuit, one gate per line.
    #[arg(long)]
    dump_circuit: Option<PathBuf>,
    /// Also write an SVG bar chart.
    #[arg(long)]
    svg: Option<PathBuf>,
}

impl SamplingArgs {
    /// Shots and seed; sampling without a seed is refused.
    fn sampling(&self) -> Result<Option<(u64, u64)>> {
        match (self.shots, self.seed) {
            (None, _) => Ok(None),
            (Some(0), _) => bail!("--shots must be at least 1"),
            (Some(_), None) => bail!("--seed is required when --shots is given"),
            (Some(shots), Some(seed)) => Ok(Some((shots, seed))),
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    sampling: SamplingArgs,
}

#[derive(Clone, Copy)]
enum Target {
    Value(u64),
    Max,
}

impl FromStr for Target {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if s == "max" {
            return Ok(Target::Max);
        }
        s.parse().map(Target::Value).map_err(|_| format!("expected an integer or `max`, got {s:?}"))
    }
}

#[derive(Clone, Copy)]
enum Iterations {
    Count(usize),
    Auto,
}

impl FromStr for Iterations {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if s == "auto" {
            return Ok(Iterations::Auto);
        }
        s.parse().map(Iterations::Count).map_err(|_| format!("expected an integer or `auto`, got {s:?}"))
    }
}

#[derive(Args)]
struct SearchArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    sampling: SamplingArgs,
    /// Return value to mark, or `max` for the largest reachable return.
    #[arg(long)]
    target_return: Target,
    /// Grover rounds, or `auto` for the standard optimum.
    #[arg(long, default_value = "auto")]
    iterations: Iterations,
}

#[derive(Args)]
struct QlearnArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = QlConfig::default().alpha)]
    alpha: f64,
    #[arg(long, default_value_t = QlConfig::default().gamma)]
    gamma: f64,
    #[arg(long, default_value_t = QlConfig::default().epsilon)]
    epsilon: f64,
    #[arg(long, default_value_t = QlConfig::default().episodes)]
    episodes: usize,
    /// Greedy evaluation episodes.
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long)]
    svg: Option<PathBuf>,
}

fn load_spec(common: &CommonArgs) -> Result<(MdpSpec, Initial)> {
    let spec = if common.mdp == "bundled" {
        MdpSpec::bundled()
    } else {
        let text = std::fs::read_to_string(&common.mdp).with_context(|| format!("reading {}", common.mdp))?;
        MdpSpec::load(&text).with_context(|| format!("loading {}", common.mdp))?
    };
    let initial = common.start.unwrap_or(spec.initial());
    Ok((spec.with_initial(initial), initial))
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("QMDP_THREADS") {
        let n: usize = v.parse().ok().filter(|&n| n > 0).with_context(|| format!("QMDP_THREADS={v:?} is not a positive integer"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn trajectories_json(common: &CommonArgs, initial: Initial, records: &[TrajectoryRecord], extra: serde_json::Value) -> Result<String> {
    let mut sorted = records.to_vec();
    qmdp_core::trajectory::sort_for_output(&mut sorted);
    let mut doc = json!({
        "steps": common.steps,
        "start": initial.to_string(),
        "trajectories": sorted,
    });
    if let (Some(d), serde_json::Value::Object(e)) = (doc.as_object_mut(), extra) {
        d.extend(e);
    }
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}

fn trajectory_csv(records: &[TrajectoryRecord], steps: usize) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(&mut buf, records, steps)?;
    Ok(String::from_utf8(buf)?)
}

/// 1-based rank of each bit string in ascending order.
fn numbering(records: &[TrajectoryRecord]) -> BTreeMap<String, usize> {
    let mut bits: Vec<&str> = records.iter().map(|r| r.bitstring.as_str()).collect();
    bits.sort_unstable();
    bits.into_iter().enumerate().map(|(k, b)| (b.to_string(), k + 1)).collect()
}

fn simulate(args: &SimulateArgs) -> Result<()> {
    let common = &args.common;
    let (spec, initial) = load_spec(common)?;
    let sampling = args.sampling.sampling()?;
    let model = build_preparation(&spec, common.steps, initial)?;
    if let Some(path) = &args.sampling.dump_circuit {
        write(path, &model.circuit.to_listing())?;
    }
    let state = model.prepare(args.sampling.backend)?;
    let mut records = model.distribution(&state);
    if let Some((shots, seed)) = sampling {
        let counts = state.sample(shots, seed)?;
        let by_bits = counts.by_bitstring();
        for r in &mut records {
            r.count = by_bits.get(&r.bitstring).copied().unwrap_or(0);
        }
    }
    let text = match common.format {
        Format::Csv => trajectory_csv(&records, common.steps)?,
        Format::Json => trajectories_json(
            common,
            initial,
            &records,
            json!({"shots": sampling.map(|s| s.0), "seed": sampling.map(|s| s.1), "num_qubits": model.num_qubits()}),
        )?,
    };
    write(&common.out, &text)?;
    if common.steps == 1 {
        let mut csv = String::from("state,action,next,prob\n");
        for t in model.conditional_transitions(&state)? {
            csv.push_str(&format!("{},{},{},{}\n", t.state, t.action, t.next, t.prob));
        }
        write(&sibling(&common.out, "transitions.csv"), &csv)?;
    }
    if let Some(path) = &args.sampling.svg {
        let ranks = numbering(&records);
        let mut bars: Vec<(usize, f64)> = records
            .iter()
            .map(|r| (ranks[&r.bitstring], if sampling.is_some() { r.count as f64 } else { r.probability }))
            .collect();
        bars.sort_by_key(|b| b.0);
        let label = if sampling.is_some() { "count" } else { "probability" };
        let bars: Vec<(String, f64)> = bars.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        write(path, &bar_chart_svg("Trajectory distribution", label, &bars))?;
    }
    println!("{} trajectories over {} qubits", records.len(), model.num_qubits());
    Ok(())
}

fn search(args: &SearchArgs) -> Result<()> {
    let common = &args.common;
    let (spec, initial) = load_spec(common)?;
    let sampling = args.sampling.sampling()?;
    let model = build_preparation(&spec, common.steps, initial)?;
    let catalog = enumerate_trajectories(&spec, common.steps, initial)?;
    let target = match args.target_return {
        Target::Value(v) => v,
        Target::Max => catalog.iter().map(|r| r.ret).max().unwrap_or(0),
    };
    let p0 = catalog.iter().filter(|r| r.ret == target).fold(0.0, |acc, r| acc + r.probability);
    let iterations = match args.iterations {
        Iterations::Count(k) => k,
        Iterations::Auto if p0 > 0.0 && p0 < 1.0 => iterations_hint(p0)?,
        Iterations::Auto => 0,
    };
    let oracle = OracleSpec::new(target);
    if let Some(path) = &args.sampling.dump_circuit {
        let mut full = model.circuit.clone();
        let round = {
            let mut c = build_oracle(&model.layout, &oracle)?;
            c.append(&build_diffuser(&model)?)?;
            c
        };
        for _ in 0..iterations {
            full.append(&round)?;
        }
        write(path, &full.to_listing())?;
    }
    let (shots, seed) = sampling.unwrap_or((0, 0));
    let report = grover_search(&model, &oracle, iterations, shots, seed, args.sampling.backend)?;
    let text = match common.format {
        Format::Json => serde_json::to_string_pretty(&report)? + "\n",
        Format::Csv => {
            let mut csv = String::from("bitstring,return,p_before,p_after,count");
            for t in 0..common.steps {
                csv.push_str(&format!(",s{t},a{t},sp{t},r{t}"));
            }
            csv.push('\n');
            for m in &report.marked {
                csv.push_str(&format!("{},{},{},{},{}", m.bitstring, m.ret, m.p_before, m.p_after, m.count));
                for s in &m.steps {
                    csv.push_str(&format!(",{},{},{},{}", s.state, s.action, s.next, s.reward));
                }
                csv.push('\n');
            }
            csv
        }
    };
    write(&common.out, &text)?;

    let ranks = numbering(&catalog);
    let by_bits = report.counts.by_bitstring();
    let marked: std::collections::BTreeSet<&str> = report.marked.iter().map(|m| m.bitstring.as_str()).collect();
    let mut bars = String::from(
        "# trajectory = rank of the bit string in ascending order among all trajectories with nonzero probability\n\
         trajectory,bitstring,count,marked\n",
    );
    let mut ordered: Vec<(&String, &usize)> = ranks.iter().collect();
    ordered.sort_by_key(|(_, k)| **k);
    let mut svg_bars = Vec::new();
    for (bits, k) in ordered {
        let count = by_bits.get(bits).copied().unwrap_or(0);
        bars.push_str(&format!("{k},{bits},{count},{}\n", u8::from(marked.contains(bits.as_str()))));
        svg_bars.push((k.to_string(), count as f64));
    }
    write(&sibling(&common.out, "bars.csv"), &bars)?;
    if let Some(path) = &args.sampling.svg {
        write(path, &bar_chart_svg(&format!("Counts after {iterations} Grover rounds, target return {target}"), "count", &svg_bars))?;
    }
    println!(
        "target return {target}: {} marked, p0 {}, p_after {}, iterations {iterations}",
        report.marked.len(),
        report.p0,
        report.p_after
    );
    Ok(())
}

fn enumerate(common: &CommonArgs) -> Result<()> {
    let (spec, initial) = load_spec(common)?;
    let records = enumerate_trajectories(&spec, common.steps, initial)?;
    let text = match common.format {
        Format::Csv => trajectory_csv(&records, common.steps)?,
        Format::Json => trajectories_json(common, initial, &records, json!({}))?,
    };
    write(&common.out, &text)?;
    println!("{} trajectories, expected return {}", records.len(), expected_return(&records));
    Ok(())
}

fn describe(steps: &[Step]) -> String {
    steps.iter().map(|s| format!("(s{},a{},s{},{})", s.state, s.action, s.next, s.reward)).collect()
}

fn qlearn(args: &QlearnArgs) -> Result<()> {
    let common = &args.common;
    let (spec, _) = load_spec(common)?;
    let config = QlConfig {
        alpha: args.alpha,
        gamma: args.gamma,
        epsilon: args.epsilon,
        episodes: args.episodes,
        horizon: common.steps,
        seed: args.seed,
    };
    let q = q_learning(&spec, &config)?;
    let policy = q.greedy_policy();
    let rollouts = greedy_rollouts(&spec, &q, args.trials, common.steps, args.seed)?;
    let text = match common.format {
        Format::Csv => q.to_csv(),
        Format::Json => {
            let doc = json!({
                "config": config,
                "q": q.values,
                "policy": policy_line(&policy),
                "rollouts": rollouts,
            });
            serde_json::to_string_pretty(&doc)? + "\n"
        }
    };
    write(&common.out, &text)?;
    let mut csv = String::from("rank,total,count,trajectory\n");
    for (k, r) in rollouts.iter().enumerate() {
        csv.push_str(&format!("{},{},{},{}\n", k + 1, r.total, r.count, describe(&r.steps)));
    }
    write(&sibling(&common.out, "rollouts.csv"), &csv)?;
    if let Some(path) = &args.svg {
        let bars: Vec<(String, f64)> = rollouts.iter().enumerate().map(|(k, r)| (format!("T{}", k + 1), r.total as f64)).collect();
        write(path, &bar_chart_svg("Greedy rollout rewards", "total reward", &bars))?;
    }
    println!("{}", policy_line(&policy));
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    configure_threads()?;
    match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Search(a) => search(a),
        Command::Enumerate(a) => enumerate(a),
        Command::Qlearn(a) => qlearn(a),
    }
}

fn main() -> std::process::ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::ExitCode::FAILURE
        }
    }
}
