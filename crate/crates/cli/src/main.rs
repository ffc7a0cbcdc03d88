//! `cim`: command-line driver for the coherent Ising machine simulator.

mod input;
mod output;

use std::collections::BTreeMap;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use cim_core::analysis::two_dopo_diagram;
use cim_core::dynamics::langevin::{linearized_variances, stationary_variances, PhysicalParams, VarianceConfig};
use cim_core::dynamics::{
    integrate_observed, random_initial_state, write_trajectory_csv, IntegratorConfig, NetworkState, NormalizedParams,
    DEFAULT_INITIAL_AMPLITUDE,
};
use cim_core::graphs::enumerate_cubic;
use cim_core::harness::{
    benchmark_corpus, benchmark_orders, run_langevin_trials, run_trials, summary_csv, sweep_coupling, sweep_pump,
    BenchmarkConfig, BenchmarkReport, LangevinTrialConfig, RefinePolicy, TrialConfig, TrialRun,
};
use cim_core::model::{brute_force_spectrum, cut_weight, ising_energy, Graph};
use cim_core::seeding::{derive_seed, rng_from_seed};
use cim_core::spectral::build_coupling;
use cim_core::{CimError, Exec};

use input::Instance;
use output::{Format, Manifest, Sink};

/// Edge coupling used on graph input when neither `--xi` nor `--chi` is given.
pub const DEFAULT_XI: f64 = -0.1;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Input(String),
    Core(CimError),
    Io(std::io::Error),
}

impl From<CimError> for CliError {
    fn from(e: CimError) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(CimError::TooLarge { .. } | CimError::OrderOutOfRange { .. }) => 3,
            CliError::Io(_) => 1,
            _ => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Input(m) => write!(f, "malformed input: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o: {e}"),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "cim", version, about = "Coherent Ising machine simulator")]
struct Cli {
    /// Worker threads for trial-level parallelism (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run Monte Carlo trials on one instance.
    Solve(SolveArgs),
    /// Success probability and reachable states over a pump-rate grid.
    SweepPump(SweepPumpArgs),
    /// Success probability over a coupling grid.
    SweepXi(SweepXiArgs),
    /// Write all connected cubic graphs of an order as canonical graph6 lines.
    Enumerate(EnumerateArgs),
    /// Stationary fluctuations of a single oscillator below threshold.
    Variance(VarianceArgs),
    /// Steady states and their stability for two coupled oscillators.
    Diagram(DiagramArgs),
    /// Worst-case success probabilities over cubic-graph corpora.
    Benchmark(BenchmarkArgs),
    /// Time series of one deterministic trial.
    Trajectory(TrajectoryArgs),
}

#[derive(Args, Debug, Serialize)]
struct OutputArgs {
    /// Output file (stdout if absent).
    #[arg(long)]
    out: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args, Debug, Serialize)]
struct CouplingArgs {
    /// Normalized pump rate.
    #[arg(long, default_value_t = 1.1, allow_negative_numbers = true)]
    p: f64,
    /// Edge coupling for graph input (default -0.1); coupling scale for Ising input.
    #[arg(long, allow_negative_numbers = true)]
    xi: Option<f64>,
    /// Coupling scale: ξ = χ J (default 0.1 for Ising input).
    #[arg(long, allow_negative_numbers = true)]
    chi: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
struct IntegratorArgs {
    #[arg(long, default_value_t = 1e-8)]
    rel_tol: f64,
    #[arg(long, default_value_t = 1e-12)]
    abs_tol: f64,
    /// Normalized time limit per trial.
    #[arg(long, default_value_t = 2000.0)]
    max_time: f64,
}

impl IntegratorArgs {
    fn config(&self) -> IntegratorConfig {
        IntegratorConfig {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_time: self.max_time,
            ..Default::default()
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
enum Method {
    Deterministic,
    Langevin,
}

#[derive(Args, Debug, Serialize)]
struct SolveArgs {
    /// Instance file: graph6, JSON graph or JSON Ising problem ("-" for stdin).
    #[arg(long, alias = "input")]
    graph: String,
    #[command(flatten)]
    coupling: CouplingArgs,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Method::Deterministic)]
    method: Method,
    #[command(flatten)]
    integrator: IntegratorArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
struct SweepPumpArgs {
    #[arg(long, alias = "input")]
    graph: String,
    #[command(flatten)]
    coupling: CouplingArgs,
    #[arg(long, allow_negative_numbers = true)]
    from: f64,
    #[arg(long, allow_negative_numbers = true)]
    to: f64,
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    steps: u64,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    integrator: IntegratorArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
struct SweepXiArgs {
    /// Instance file; a ferromagnetic pair when absent.
    #[arg(long, alias = "input")]
    graph: Option<String>,
    #[arg(long, default_value_t = 1.1, allow_negative_numbers = true)]
    p: f64,
    /// First `--xi` value of the grid.
    #[arg(long, allow_negative_numbers = true)]
    from: f64,
    #[arg(long, allow_negative_numbers = true)]
    to: f64,
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    steps: u64,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    integrator: IntegratorArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
struct EnumerateArgs {
    #[arg(long)]
    order: usize,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug, Serialize)]
struct VarianceArgs {
    /// Normalized pump rates below threshold.
    #[arg(long, value_delimiter = ',', default_value = "0,0.5,0.9")]
    pumps: Vec<f64>,
    #[arg(long, default_value_t = 1000)]
    paths: usize,
    #[arg(long, default_value_t = 200.0)]
    burn_in: f64,
    #[arg(long, default_value_t = 100.0)]
    window: f64,
    #[arg(long, default_value_t = 1.0)]
    sample_interval: f64,
    #[arg(long)]
    dtau: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    gamma_s: f64,
    #[arg(long, default_value_t = 100.0)]
    gamma_p: f64,
    #[arg(long, default_value_t = 1e-4)]
    kappa: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
struct DiagramArgs {
    #[arg(long, allow_negative_numbers = true)]
    p: f64,
    /// Mutual coupling ξ of the pair.
    #[arg(long, allow_negative_numbers = true)]
    xi: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
struct BenchmarkArgs {
    /// Cubic-graph orders to enumerate and benchmark.
    #[arg(long, value_delimiter = ',', conflicts_with = "graph")]
    orders: Vec<usize>,
    /// Corpus file of graphs instead of enumerated orders.
    #[arg(long)]
    graph: Option<String>,
    #[arg(long, default_value_t = 1.1, allow_negative_numbers = true)]
    p: f64,
    #[arg(long, default_value_t = -0.1, allow_negative_numbers = true)]
    xi: f64,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    #[arg(long, default_value_t = 10_000)]
    refine_trials: usize,
    #[arg(long, default_value_t = 0.25)]
    refine_below: f64,
    #[arg(long, default_value_t = 10)]
    refine_lowest: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    integrator: IntegratorArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
struct TrajectoryArgs {
    #[arg(long, alias = "input")]
    graph: String,
    #[command(flatten)]
    coupling: CouplingArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Trial index within the seed stream.
    #[arg(long, default_value_t = 0)]
    trial: u64,
    /// Record every this many accepted steps.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    stride: u64,
    #[command(flatten)]
    integrator: IntegratorArgs,
    #[command(flatten)]
    output: OutputArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cim: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        set_threads(n)?;
    }
    match &cli.command {
        Command::Solve(a) => solve(a),
        Command::SweepPump(a) => sweep_pump_cmd(a),
        Command::SweepXi(a) => sweep_xi_cmd(a),
        Command::Enumerate(a) => enumerate_cmd(a),
        Command::Variance(a) => variance_cmd(a),
        Command::Diagram(a) => diagram_cmd(a),
        Command::Benchmark(a) => benchmark_cmd(a),
        Command::Trajectory(a) => trajectory_cmd(a),
    }
}

#[cfg(feature = "parallel")]
fn set_threads(n: usize) -> Result<(), CliError> {
    if n == 0 {
        return Err(CliError::Usage("--threads must be positive".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

#[cfg(not(feature = "parallel"))]
fn set_threads(n: usize) -> Result<(), CliError> {
    if n == 0 {
        return Err(CliError::Usage("--threads must be positive".into()));
    }
    Ok(())
}

fn grid(from: f64, to: f64, steps: u64) -> Vec<f64> {
    if steps == 1 {
        return vec![from];
    }
    (0..steps)
        .map(|k| from + (to - from) * k as f64 / (steps - 1) as f64)
        .collect()
}

fn trial_config(p: f64, chi: f64, trials: u64, seed: u64, integrator: &IntegratorArgs) -> TrialConfig {
    TrialConfig {
        p,
        chi,
        n_trials: trials as usize,
        master_seed: seed,
        integrator: integrator.config(),
        exec: Exec::Parallel,
        ..Default::default()
    }
}

#[derive(Serialize)]
struct BestCut {
    spins: Vec<i8>,
    ising_energy: f64,
    cut_weight: Option<f64>,
}

fn solve(a: &SolveArgs) -> Result<(), CliError> {
    let inst = input::read_single(&a.graph)?;
    let chi = inst.resolve_chi(a.coupling.xi, a.coupling.chi)?;
    let problem = inst.problem();
    let key = inst.key()?;
    let run: TrialRun = match a.method {
        Method::Deterministic => run_trials(
            &problem,
            &key,
            &trial_config(a.coupling.p, chi, a.trials, a.seed, &a.integrator),
        )?,
        Method::Langevin => run_langevin_trials(
            &problem,
            &key,
            &LangevinTrialConfig {
                p: a.coupling.p,
                chi,
                n_trials: a.trials as usize,
                master_seed: a.seed,
                ..Default::default()
            },
        )?,
    };
    let spectrum = brute_force_spectrum(&problem)?;
    let best = match run.best_readout() {
        Some(s) => Some(BestCut {
            spins: s.spins().to_vec(),
            ising_energy: ising_energy(&problem, s)?,
            cut_weight: match &inst {
                Instance::Graph(g) => Some(cut_weight(g, s)?),
                Instance::Ising(_) => None,
            },
        }),
        None => None,
    };
    let manifest = Manifest::new("solve", a, json!({ "chi": chi }));
    let sink = Sink::new(a.output.out.as_deref());
    match a.output.format {
        Format::Json => sink.json(&json!({
            "manifest": manifest,
            "stats": run.stats,
            "best_cut": best,
            "ground_energy": spectrum.ground_energy,
            "n0": spectrum.n0,
            "n1": spectrum.n1,
        })),
        Format::Csv => {
            let s = &run.stats;
            let mut csv = String::from("n_trials,n_success,success_prob,group_std,n_unconverged,n_ambiguous\n");
            csv.push_str(&format!(
                "{},{},{},{},{},{}\n",
                s.n_trials,
                s.n_success,
                s.success_prob,
                output::opt(s.group_std),
                s.n_unconverged,
                s.n_ambiguous
            ));
            sink.csv(&manifest, &csv)
        }
    }
}

fn sweep_pump_cmd(a: &SweepPumpArgs) -> Result<(), CliError> {
    let inst = input::read_single(&a.graph)?;
    let chi = inst.resolve_chi(a.coupling.xi, a.coupling.chi)?;
    let problem = inst.problem();
    let p_grid = grid(a.from, a.to, a.steps);
    let cfg = trial_config(a.coupling.p, chi, a.trials, a.seed, &a.integrator);
    let points = sweep_pump(&problem, &inst.key()?, &p_grid, &cfg)?;
    let threshold = cim_core::spectral::network_threshold(&build_coupling(&problem, chi)?);
    let manifest = Manifest::new("sweep-pump", a, json!({ "chi": chi, "p_grid": p_grid }));
    let sink = Sink::new(a.output.out.as_deref());
    match a.output.format {
        Format::Json => sink.json(&json!({ "manifest": manifest, "threshold": threshold, "points": points })),
        Format::Csv => {
            let mut csv = String::from("p,success_prob,group_std,n_trivial,n_states,n_unconverged\n");
            for pt in &points {
                csv.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    pt.p,
                    pt.stats.success_prob,
                    output::opt(pt.stats.group_std),
                    pt.n_trivial,
                    pt.states.len(),
                    pt.stats.n_unconverged
                ));
            }
            sink.csv(&manifest, &csv)
        }
    }
}

fn sweep_xi_cmd(a: &SweepXiArgs) -> Result<(), CliError> {
    let inst = match &a.graph {
        Some(path) => input::read_single(path)?,
        None => Instance::Ising(cim_core::model::IsingProblem::from_pairs(2, &[(0, 1, 1.0)])?),
    };
    let xi_grid = grid(a.from, a.to, a.steps);
    let chi_grid = xi_grid
        .iter()
        .map(|&x| inst.resolve_chi(Some(x), None))
        .collect::<Result<Vec<_>, _>>()?;
    let cfg = trial_config(a.p, chi_grid[0], a.trials, a.seed, &a.integrator);
    let points = sweep_coupling(&inst.problem(), &inst.key()?, &chi_grid, &cfg)?;
    let manifest = Manifest::new("sweep-xi", a, json!({ "xi_grid": xi_grid, "chi_grid": chi_grid }));
    let sink = Sink::new(a.output.out.as_deref());
    match a.output.format {
        Format::Json => {
            let rows: Vec<_> = xi_grid
                .iter()
                .zip(&points)
                .map(|(xi, pt)| json!({ "xi": xi, "chi": pt.chi, "stats": pt.stats }))
                .collect();
            sink.json(&json!({ "manifest": manifest, "points": rows }))
        }
        Format::Csv => {
            let mut csv = String::from("xi,chi,success_prob,group_std,n_unconverged\n");
            for (xi, pt) in xi_grid.iter().zip(&points) {
                csv.push_str(&format!(
                    "{},{},{},{},{}\n",
                    xi,
                    pt.chi,
                    pt.stats.success_prob,
                    output::opt(pt.stats.group_std),
                    pt.stats.n_unconverged
                ));
            }
            sink.csv(&manifest, &csv)
        }
    }
}

fn enumerate_cmd(a: &EnumerateArgs) -> Result<(), CliError> {
    let graphs = enumerate_cubic(a.order)?;
    let mut text = String::new();
    for g in &graphs {
        text.push_str(&g.canonical_code);
        text.push('\n');
    }
    Sink::new(a.out.as_deref()).raw(&text)?;
    if a.out.is_some() {
        let manifest = Manifest::new("enumerate", a, json!({ "count": graphs.len() }));
        eprintln!("{}", serde_json::to_string(&manifest).expect("manifest serializes"));
    }
    Ok(())
}

fn variance_cmd(a: &VarianceArgs) -> Result<(), CliError> {
    if a.pumps.is_empty() {
        return Err(CliError::Usage("--pumps is empty".into()));
    }
    let cfg = VarianceConfig {
        n_paths: a.paths,
        burn_in: a.burn_in,
        window: a.window,
        sample_interval: a.sample_interval,
        dtau: a.dtau,
    };
    let mut rows = Vec::new();
    for &p in &a.pumps {
        let params = PhysicalParams::with_normalized_pump(a.gamma_s, a.gamma_p, a.kappa, p)?;
        let est = stationary_variances(&params, &cfg, a.seed, Exec::Parallel)?;
        let (lin_in, lin_q) = linearized_variances(p);
        rows.push((p, est, lin_in, lin_q));
    }
    let manifest = Manifest::new("variance", a, json!({}));
    let sink = Sink::new(a.output.out.as_deref());
    match a.output.format {
        Format::Json => {
            let pts: Vec<_> = rows
                .iter()
                .map(|(p, est, li, lq)| json!({ "p": p, "estimate": est, "linearized_inphase": li, "linearized_quadrature": lq }))
                .collect();
            sink.json(&json!({ "manifest": manifest, "points": pts }))
        }
        Format::Csv => {
            let mut csv =
                String::from("p,var_inphase,var_quadrature,linearized_inphase,linearized_quadrature,n_samples\n");
            for (p, est, li, lq) in &rows {
                csv.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    p, est.var_inphase, est.var_quadrature, li, lq, est.n_samples
                ));
            }
            sink.csv(&manifest, &csv)
        }
    }
}

fn diagram_cmd(a: &DiagramArgs) -> Result<(), CliError> {
    let d = two_dopo_diagram(a.p, a.xi)?;
    let manifest = Manifest::new("diagram", a, json!({}));
    let sink = Sink::new(a.output.out.as_deref());
    match a.output.format {
        Format::Json => sink.json(&json!({ "manifest": manifest, "diagram": d })),
        Format::Csv => {
            let mut csv = String::from("label,c1,c2,stability\n");
            for s in &d.states {
                let label = serde_json::to_value(s.label).expect("label serializes");
                let stab = serde_json::to_value(s.stability).expect("stability serializes");
                csv.push_str(&format!(
                    "{},{},{},{}\n",
                    label.as_str().unwrap_or_default(),
                    s.c1,
                    s.c2,
                    stab.as_str().unwrap_or_default()
                ));
            }
            sink.csv(&manifest, &csv)
        }
    }
}

fn benchmark_cmd(a: &BenchmarkArgs) -> Result<(), CliError> {
    let cfg = BenchmarkConfig {
        trials: trial_config(a.p, -a.xi, a.trials, a.seed, &a.integrator),
        refine: RefinePolicy {
            below: a.refine_below,
            lowest: a.refine_lowest,
            n_refine: a.refine_trials,
        },
    };
    let report = match &a.graph {
        Some(path) => {
            let mut by_order: BTreeMap<usize, Vec<Graph>> = BTreeMap::new();
            for g in input::read_graphs(path)? {
                by_order.entry(g.order()).or_default().push(g);
            }
            let mut report = BenchmarkReport {
                config: cfg,
                orders: Vec::new(),
                instances: Vec::new(),
            };
            for corpus in by_order.values() {
                let (summary, instances) = benchmark_corpus(corpus, &cfg)?;
                report.orders.push(summary);
                report.instances.extend(instances);
            }
            report
        }
        None if a.orders.is_empty() => return Err(CliError::Usage("give --orders or --graph".into())),
        None => benchmark_orders(&a.orders, &cfg)?,
    };
    let manifest = Manifest::new("benchmark", a, json!({ "chi": -a.xi }));
    let sink = Sink::new(a.output.out.as_deref());
    match a.output.format {
        Format::Json => sink.json(&json!({ "manifest": manifest, "report": report })),
        Format::Csv => sink.csv(&manifest, &summary_csv(&report.orders)),
    }
}

fn trajectory_cmd(a: &TrajectoryArgs) -> Result<(), CliError> {
    let inst = input::read_single(&a.graph)?;
    let chi = inst.resolve_chi(a.coupling.xi, a.coupling.chi)?;
    let problem = inst.problem();
    let params = NormalizedParams::new(a.coupling.p, build_coupling(&problem, chi)?)?;
    let seed = derive_seed(a.seed, &inst.key()?, a.trial);
    let mut rng = rng_from_seed(seed);
    let x0 = random_initial_state(problem.size(), DEFAULT_INITIAL_AMPLITUDE, &mut rng)?;
    let mut states: Vec<NetworkState> = Vec::new();
    let outcome = integrate_observed(&x0, &params, &a.integrator.config(), a.stride, |s| {
        states.push(s.clone())
    })?;
    if states.last().is_none_or(|s| s.t != outcome.state.t) {
        states.push(outcome.state.clone());
    }
    let manifest = Manifest::new("trajectory", a, json!({ "chi": chi, "trial_seed": seed }));
    let sink = Sink::new(a.output.out.as_deref());
    match a.output.format {
        Format::Json => sink.json(&json!({
            "manifest": manifest,
            "converged": outcome.converged,
            "states": states,
        })),
        Format::Csv => {
            let mut buf = Vec::new();
            write_trajectory_csv(&mut buf, &states)?;
            sink.csv(&manifest, &String::from_utf8(buf).expect("CSV is UTF-8"))
        }
    }
}
