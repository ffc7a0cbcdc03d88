//! Monte Carlo success-probability experiments.
//!
//! A trial starts every oscillator at a small amplitude with a random phase,
//! integrates the normalized network to a steady state, reads out the in-phase
//! signs and ranks the resulting cut against the exhaustive spectrum. A trial
//! succeeds when it lands on a maximum cut. Trial `i` of an instance draws from a
//! stream derived from `(master_seed, instance key, i)` only, so results do not
//! depend on scheduling, thread count or which other instances share the run.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::analysis::{classify_outcome, decay_report};
use crate::dynamics::langevin::{langevin_to_steady_state, LangevinConfig, PhysicalParams};
use crate::dynamics::{
    integrate_to_steady_state, random_initial_state, spin_readout, IntegratorConfig, NetworkState, NormalizedParams,
    DEFAULT_INITIAL_AMPLITUDE,
};
use crate::error::{CimError, Result};
use crate::graphs::{canonical_code, emit_graph6, enumerate_cubic, MAX_CANONICAL_ORDER};
use crate::model::{brute_force_spectrum, maxcut_to_ising, CutSpectrum, Graph, IsingProblem, SpinConfig};
use crate::parallel::Exec;
use crate::seeding::{derive_seed, rng_from_seed};
use crate::spectral::{build_coupling, CouplingMatrix};

pub const DEFAULT_PUMP: f64 = 1.1;
/// Edge coupling `ξ = −0.1` of a unit-weight MAX-CUT reduction (`J = −1`).
pub const DEFAULT_CHI: f64 = 0.1;
pub const DEFAULT_TRIALS: usize = 100;
pub const DEFAULT_REFINE_TRIALS: usize = 10_000;
pub const GROUP_SIZE: usize = 100;
/// Amplitude below which a converged state counts as the trivial state.
pub const TRIVIAL_AMPLITUDE: f64 = 1e-6;
/// Distinct steady states are at least this far apart in `c` (up to a global sign).
pub const STATE_DEDUP_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub index: u64,
    pub seed: u64,
    pub converged: bool,
    /// `None` when some `|c_j|` is at or below the readout floor.
    pub readout: Option<SpinConfig>,
    /// Present iff converged with an unambiguous readout.
    pub rank: Option<usize>,
    pub f_excess: Option<f64>,
    /// Accepted integrator steps.
    pub wall_steps: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuccessStats {
    pub n_trials: u64,
    pub n_success: u64,
    pub success_prob: f64,
    /// Sample standard deviation of success frequencies over consecutive groups of
    /// 100 trials; `None` with fewer than two groups.
    pub group_std: Option<f64>,
    pub n_groups: u64,
    pub per_rank_counts: BTreeMap<usize, u64>,
    pub n_unconverged: u64,
    pub n_ambiguous: u64,
}

impl SuccessStats {
    pub fn from_records(records: &[TrialRecord]) -> Self {
        let n = records.len() as u64;
        let mut per_rank_counts = BTreeMap::new();
        let (mut n_success, mut n_unconverged, mut n_ambiguous) = (0, 0, 0);
        for r in records {
            if !r.converged {
                n_unconverged += 1;
            } else if let Some(rank) = r.rank {
                *per_rank_counts.entry(rank).or_insert(0) += 1;
                n_success += (rank == 0) as u64;
            } else {
                n_ambiguous += 1;
            }
        }
        let groups: Vec<f64> = records
            .chunks_exact(GROUP_SIZE)
            .map(|g| g.iter().filter(|r| r.rank == Some(0)).count() as f64 / GROUP_SIZE as f64)
            .collect();
        let group_std = (groups.len() >= 2).then(|| {
            let m = groups.iter().sum::<f64>() / groups.len() as f64;
            let ss: f64 = groups.iter().map(|g| (g - m) * (g - m)).sum();
            (ss / (groups.len() - 1) as f64).sqrt()
        });
        Self {
            n_trials: n,
            n_success,
            success_prob: if n == 0 { 0.0 } else { n_success as f64 / n as f64 },
            group_std,
            n_groups: groups.len() as u64,
            per_rank_counts,
            n_unconverged,
            n_ambiguous,
        }
    }

    /// Binomial standard error `√(q(1 − q)/n)`.
    pub fn binomial_se(&self) -> f64 {
        let q = self.success_prob;
        (q * (1.0 - q) / self.n_trials.max(1) as f64).sqrt()
    }
}

/// Deterministic-path trial settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub p: f64,
    /// Coupling scale: `ξ_jl = χ J_jl`.
    pub chi: f64,
    pub n_trials: usize,
    pub master_seed: u64,
    /// Index of the first trial; later batches continue the same streams.
    pub first_trial: u64,
    pub initial_amplitude: f64,
    pub integrator: IntegratorConfig,
    pub exec: Exec,
}

impl Default for TrialConfig {
    fn default() -> Self {
        Self {
            p: DEFAULT_PUMP,
            chi: DEFAULT_CHI,
            n_trials: DEFAULT_TRIALS,
            master_seed: 0,
            first_trial: 0,
            initial_amplitude: DEFAULT_INITIAL_AMPLITUDE,
            integrator: IntegratorConfig::default(),
            exec: Exec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRun {
    pub stats: SuccessStats,
    pub records: Vec<TrialRecord>,
}

impl TrialRun {
    fn from_records(records: Vec<TrialRecord>) -> Self {
        Self {
            stats: SuccessStats::from_records(&records),
            records,
        }
    }

    /// Readout of a successful trial, if any.
    pub fn best_readout(&self) -> Option<&SpinConfig> {
        self.records
            .iter()
            .filter(|r| r.rank.is_some())
            .min_by_key(|r| r.rank)
            .and_then(|r| r.readout.as_ref())
    }
}

/// Stream key of an instance: its canonical code when it can be computed, its
/// graph6 line otherwise.
pub fn graph_instance_key(g: &Graph) -> Result<Vec<u8>> {
    let code = if g.order() <= MAX_CANONICAL_ORDER {
        canonical_code(g)?
    } else {
        emit_graph6(g)?
    };
    Ok(code.into_bytes())
}

fn check_trials(n: usize) -> Result<()> {
    if n == 0 {
        return Err(CimError::InvalidParameter("at least one trial is required".into()));
    }
    Ok(())
}

struct Prepared {
    params: NormalizedParams,
    spectrum: CutSpectrum,
}

fn prepare(problem: &IsingProblem, p: f64, chi: f64) -> Result<Prepared> {
    let coupling = build_coupling(problem, chi)?;
    Ok(Prepared {
        params: NormalizedParams::new(p, coupling)?,
        spectrum: brute_force_spectrum(problem)?,
    })
}

fn score(
    index: u64,
    seed: u64,
    converged: bool,
    state: &NetworkState,
    steps: u64,
    prep: &Prepared,
) -> Result<TrialRecord> {
    let readout = spin_readout(state).ok();
    let (rank, f_excess) = match (&readout, converged) {
        (Some(spins), true) => (
            Some(classify_outcome(spins, &prep.spectrum)?),
            Some(decay_report(state, &prep.params)?.f_excess),
        ),
        _ => (None, None),
    };
    Ok(TrialRecord {
        index,
        seed,
        converged,
        readout,
        rank,
        f_excess,
        wall_steps: steps,
    })
}

fn run_deterministic(
    problem: &IsingProblem,
    instance_key: &[u8],
    cfg: &TrialConfig,
) -> Result<Vec<(TrialRecord, NetworkState)>> {
    check_trials(cfg.n_trials)?;
    cfg.integrator.validate()?;
    let prep = prepare(problem, cfg.p, cfg.chi)?;
    let n = problem.size();
    cfg.exec
        .map(cfg.n_trials, |k| {
            let index = cfg.first_trial + k as u64;
            let seed = derive_seed(cfg.master_seed, instance_key, index);
            let mut rng = rng_from_seed(seed);
            let x0 = random_initial_state(n, cfg.initial_amplitude, &mut rng)?;
            let out = integrate_to_steady_state(&x0, &prep.params, &cfg.integrator)?;
            let rec = score(index, seed, out.converged, &out.state, out.accepted_steps, &prep)?;
            Ok((rec, out.state))
        })
        .into_iter()
        .collect()
}

/// Runs `cfg.n_trials` deterministic trials on `problem`.
pub fn run_trials(problem: &IsingProblem, instance_key: &[u8], cfg: &TrialConfig) -> Result<TrialRun> {
    let records = run_deterministic(problem, instance_key, cfg)?
        .into_iter()
        .map(|(r, _)| r)
        .collect();
    Ok(TrialRun::from_records(records))
}

/// Like [`run_trials`], also returning every final state.
pub fn run_trials_with_states(
    problem: &IsingProblem,
    instance_key: &[u8],
    cfg: &TrialConfig,
) -> Result<(TrialRun, Vec<NetworkState>)> {
    let (records, states): (Vec<_>, Vec<_>) = run_deterministic(problem, instance_key, cfg)?.into_iter().unzip();
    Ok((TrialRun::from_records(records), states))
}

/// Stochastic-path trial settings. The pump is given in normalized units and
/// converted with the oscillator rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LangevinTrialConfig {
    pub p: f64,
    pub chi: f64,
    pub gamma_s: f64,
    pub gamma_p: f64,
    pub kappa: f64,
    pub n_trials: usize,
    pub master_seed: u64,
    pub first_trial: u64,
    pub langevin: LangevinConfig,
    pub exec: Exec,
}

impl Default for LangevinTrialConfig {
    fn default() -> Self {
        Self {
            p: DEFAULT_PUMP,
            chi: DEFAULT_CHI,
            gamma_s: 1.0,
            gamma_p: 100.0,
            kappa: 1e-4,
            n_trials: DEFAULT_TRIALS,
            master_seed: 0,
            first_trial: 0,
            langevin: LangevinConfig::default(),
            exec: Exec::default(),
        }
    }
}

/// Runs trials of the c-number Langevin network started from the vacuum.
pub fn run_langevin_trials(problem: &IsingProblem, instance_key: &[u8], cfg: &LangevinTrialConfig) -> Result<TrialRun> {
    check_trials(cfg.n_trials)?;
    let phys = PhysicalParams::with_normalized_pump(cfg.gamma_s, cfg.gamma_p, cfg.kappa, cfg.p)?;
    let prep = prepare(problem, cfg.p, cfg.chi)?;
    let key = [b"langevin:".as_slice(), instance_key].concat();
    let records = cfg
        .exec
        .map(cfg.n_trials, |k| {
            let index = cfg.first_trial + k as u64;
            let seed = derive_seed(cfg.master_seed, &key, index);
            let mut rng = rng_from_seed(seed);
            let out = langevin_to_steady_state(&phys, &prep.params.coupling, &cfg.langevin, &mut rng)?;
            score(index, seed, out.converged, &out.state, out.steps, &prep)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(TrialRun::from_records(records))
}

/// A distinct nontrivial steady state reached in a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReachedState {
    /// In-phase components, sign-fixed so that the first one is positive.
    pub c: Vec<f64>,
    pub rank: Option<usize>,
    pub f_excess: Option<f64>,
    /// `F / (2 max|ξ|)`.
    pub f_scaled: Option<f64>,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PumpPoint {
    pub p: f64,
    pub stats: SuccessStats,
    /// Converged trials that ended in the trivial state.
    pub n_trivial: u64,
    pub states: Vec<ReachedState>,
}

fn sign_fixed(c: &[f64]) -> Vec<f64> {
    let flip = c.iter().find(|v| v.abs() > TRIVIAL_AMPLITUDE).is_some_and(|&v| v < 0.0);
    c.iter().map(|&v| if flip { -v } else { v }).collect()
}

fn collect_states(run: &TrialRun, states: &[NetworkState], coupling: &CouplingMatrix) -> (u64, Vec<ReachedState>) {
    let scale = 2.0 * coupling.max_abs();
    let mut n_trivial = 0;
    let mut out: Vec<ReachedState> = Vec::new();
    for (rec, st) in run.records.iter().zip(states) {
        if !rec.converged {
            continue;
        }
        if st.max_amplitude() < TRIVIAL_AMPLITUDE {
            n_trivial += 1;
            continue;
        }
        let c = sign_fixed(&st.c);
        let same = |r: &ReachedState| r.c.iter().zip(&c).all(|(a, b)| (a - b).abs() <= STATE_DEDUP_TOLERANCE);
        if let Some(r) = out.iter_mut().find(|r| same(r)) {
            r.count += 1;
        } else {
            out.push(ReachedState {
                c,
                rank: rec.rank,
                f_excess: rec.f_excess,
                f_scaled: rec.f_excess.filter(|_| scale > 0.0).map(|f| f / scale),
                count: 1,
            });
        }
    }
    (n_trivial, out)
}

/// Success statistics and reachable steady states at each pump rate.
pub fn sweep_pump(
    problem: &IsingProblem,
    instance_key: &[u8],
    p_grid: &[f64],
    cfg: &TrialConfig,
) -> Result<Vec<PumpPoint>> {
    if p_grid.is_empty() {
        return Err(CimError::InvalidParameter("pump grid is empty".into()));
    }
    let coupling = build_coupling(problem, cfg.chi)?;
    p_grid
        .iter()
        .map(|&p| {
            let (run, states) = run_trials_with_states(problem, instance_key, &TrialConfig { p, ..*cfg })?;
            let (n_trivial, states) = collect_states(&run, &states, &coupling);
            Ok(PumpPoint {
                p,
                stats: run.stats,
                n_trivial,
                states,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingPoint {
    pub chi: f64,
    pub stats: SuccessStats,
}

/// Success statistics at each coupling scale.
pub fn sweep_coupling(
    problem: &IsingProblem,
    instance_key: &[u8],
    chi_grid: &[f64],
    cfg: &TrialConfig,
) -> Result<Vec<CouplingPoint>> {
    if chi_grid.is_empty() {
        return Err(CimError::InvalidParameter("coupling grid is empty".into()));
    }
    chi_grid
        .iter()
        .map(|&chi| {
            let run = run_trials(problem, instance_key, &TrialConfig { chi, ..*cfg })?;
            Ok(CouplingPoint { chi, stats: run.stats })
        })
        .collect()
}

/// Which instances get additional trials after screening.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefinePolicy {
    /// Instances screened below this success probability are refined...
    pub below: f64,
    /// ...as are the this many lowest of each order.
    pub lowest: usize,
    pub n_refine: usize,
}

impl Default for RefinePolicy {
    fn default() -> Self {
        Self {
            below: 0.25,
            lowest: 10,
            n_refine: DEFAULT_REFINE_TRIALS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    pub trials: TrialConfig,
    pub refine: RefinePolicy,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceResult {
    pub order: usize,
    pub canonical_code: String,
    pub n0: u64,
    pub n1: u64,
    pub screening: SuccessStats,
    /// Statistics of the refinement trials alone.
    pub refined: Option<SuccessStats>,
    /// Refined estimate when available, screening estimate otherwise.
    pub success_prob: f64,
}

impl InstanceResult {
    pub fn final_stats(&self) -> &SuccessStats {
        self.refined.as_ref().unwrap_or(&self.screening)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderSummary {
    pub order: usize,
    pub n_instances: usize,
    pub min: f64,
    pub mean: f64,
    pub max: f64,
    /// Standard deviation of the per-instance success probabilities.
    pub instance_std: f64,
    pub argmin_code: String,
    pub argmin_n0: u64,
    pub argmin_n1: u64,
    /// Group standard deviation of the worst instance's final estimate.
    pub argmin_group_std: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkReport {
    pub config: BenchmarkConfig,
    pub orders: Vec<OrderSummary>,
    pub instances: Vec<InstanceResult>,
}

/// Screens every instance, refines per the policy and summarizes. All graphs in
/// `corpus` must have the same order.
pub fn benchmark_corpus(corpus: &[Graph], cfg: &BenchmarkConfig) -> Result<(OrderSummary, Vec<InstanceResult>)> {
    let Some(first) = corpus.first() else {
        return Err(CimError::InvalidParameter("empty corpus".into()));
    };
    let order = first.order();
    if let Some(g) = corpus.iter().find(|g| g.order() != order) {
        return Err(CimError::InvalidGraph(format!(
            "corpus mixes orders {order} and {}",
            g.order()
        )));
    }
    let mut results = Vec::with_capacity(corpus.len());
    let mut problems = Vec::with_capacity(corpus.len());
    for g in corpus {
        let key = graph_instance_key(g)?;
        let problem = maxcut_to_ising(g);
        let spectrum = brute_force_spectrum(&problem)?;
        let run = run_trials(&problem, &key, &cfg.trials)?;
        results.push(InstanceResult {
            order,
            canonical_code: String::from_utf8(key.clone()).expect("graph6 is ASCII"),
            n0: spectrum.n0,
            n1: spectrum.n1,
            success_prob: run.stats.success_prob,
            screening: run.stats,
            refined: None,
        });
        problems.push((problem, key));
    }

    let mut by_q: Vec<usize> = (0..results.len()).collect();
    by_q.sort_by(|&a, &b| {
        results[a]
            .success_prob
            .total_cmp(&results[b].success_prob)
            .then_with(|| results[a].canonical_code.cmp(&results[b].canonical_code))
    });
    if cfg.refine.n_refine > 0 {
        let mut refine = vec![false; results.len()];
        for (rank, &i) in by_q.iter().enumerate() {
            refine[i] = rank < cfg.refine.lowest || results[i].success_prob < cfg.refine.below;
        }
        for (i, r) in results.iter_mut().enumerate() {
            if !refine[i] {
                continue;
            }
            let (problem, key) = &problems[i];
            let batch = TrialConfig {
                n_trials: cfg.refine.n_refine,
                first_trial: cfg.trials.first_trial + cfg.trials.n_trials as u64,
                ..cfg.trials
            };
            let run = run_trials(problem, key, &batch)?;
            r.success_prob = run.stats.success_prob;
            r.refined = Some(run.stats);
        }
    }

    let qs: Vec<f64> = results.iter().map(|r| r.success_prob).collect();
    let n = qs.len() as f64;
    let mean = qs.iter().sum::<f64>() / n;
    let var = if qs.len() > 1 {
        qs.iter().map(|q| (q - mean) * (q - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let argmin = (0..results.len())
        .min_by(|&a, &b| {
            qs[a]
                .total_cmp(&qs[b])
                .then_with(|| results[a].canonical_code.cmp(&results[b].canonical_code))
        })
        .expect("nonempty corpus");
    let worst = &results[argmin];
    let summary = OrderSummary {
        order,
        n_instances: results.len(),
        min: qs[argmin],
        mean,
        max: qs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        instance_std: var.sqrt(),
        argmin_code: worst.canonical_code.clone(),
        argmin_n0: worst.n0,
        argmin_n1: worst.n1,
        argmin_group_std: worst.final_stats().group_std,
    };
    Ok((summary, results))
}

/// [`benchmark_corpus`] over the enumerated cubic graphs of each order.
pub fn benchmark_orders(orders: &[usize], cfg: &BenchmarkConfig) -> Result<BenchmarkReport> {
    if orders.is_empty() {
        return Err(CimError::InvalidParameter("no orders given".into()));
    }
    let mut report = BenchmarkReport {
        config: *cfg,
        orders: Vec::new(),
        instances: Vec::new(),
    };
    for &order in orders {
        let corpus: Vec<Graph> = enumerate_cubic(order)?.into_iter().map(|c| c.graph).collect();
        let (summary, instances) = benchmark_corpus(&corpus, cfg)?;
        report.orders.push(summary);
        report.instances.extend(instances);
    }
    Ok(report)
}

/// Per-order summary rows: `order,n_instances,min,mean,max,argmin_code`.
pub fn summary_csv(orders: &[OrderSummary]) -> String {
    let mut out = String::from("order,n_instances,min,mean,max,argmin_code\n");
    for o in orders {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            o.order, o.n_instances, o.min, o.mean, o.max, o.argmin_code
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ferro_pair() -> IsingProblem {
        IsingProblem::from_pairs(2, &[(0, 1, 1.0)]).unwrap()
    }

    fn cfg(p: f64, chi: f64, n: usize) -> TrialConfig {
        TrialConfig {
            p,
            chi,
            n_trials: n,
            master_seed: 3,
            ..Default::default()
        }
    }

    #[test]
    fn strong_ferromagnetic_coupling_always_succeeds() {
        let run = run_trials(&ferro_pair(), b"pair", &cfg(2.0, 0.6, 200)).unwrap();
        assert_eq!(run.stats.n_success, 200);
        assert_eq!(run.stats.success_prob, 1.0);
        assert_eq!(run.stats.group_std, Some(0.0));
    }

    #[test]
    fn runs_are_reproducible_and_batches_compose() {
        let whole = run_trials(&ferro_pair(), b"pair", &cfg(2.0, 0.05, 40)).unwrap();
        let again = run_trials(&ferro_pair(), b"pair", &cfg(2.0, 0.05, 40)).unwrap();
        assert_eq!(whole, again);
        let tail = run_trials(
            &ferro_pair(),
            b"pair",
            &TrialConfig {
                first_trial: 25,
                n_trials: 15,
                ..cfg(2.0, 0.05, 0)
            },
        )
        .unwrap();
        assert_eq!(tail.records[..], whole.records[25..]);
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let par = run_trials(&ferro_pair(), b"pair", &cfg(2.0, 0.05, 30)).unwrap();
        let seq = run_trials(
            &ferro_pair(),
            b"pair",
            &TrialConfig {
                exec: Exec::Sequential,
                ..cfg(2.0, 0.05, 30)
            },
        )
        .unwrap();
        assert_eq!(par, seq);
    }

    #[test]
    fn zero_trials_rejected() {
        assert!(run_trials(&ferro_pair(), b"pair", &cfg(2.0, 0.6, 0)).is_err());
    }

    #[test]
    fn group_statistics() {
        let mk = |rank: Option<usize>| TrialRecord {
            index: 0,
            seed: 0,
            converged: true,
            readout: None,
            rank,
            f_excess: None,
            wall_steps: 0,
        };
        // first group all successes, second none, remainder ignored for groups
        let mut recs: Vec<TrialRecord> = (0..100).map(|_| mk(Some(0))).collect();
        recs.extend((0..100).map(|_| mk(Some(1))));
        recs.extend((0..50).map(|_| mk(None)));
        let s = SuccessStats::from_records(&recs);
        assert_eq!(s.n_trials, 250);
        assert_eq!(s.n_groups, 2);
        assert!((s.group_std.unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(s.n_ambiguous, 50);
        assert_eq!(s.per_rank_counts[&1], 100);
        assert!((s.success_prob - 0.4).abs() < 1e-15);
    }

    #[test]
    fn below_threshold_sweep_finds_only_trivial_states() {
        let pts = sweep_pump(&ferro_pair(), b"pair", &[0.3, 2.0], &cfg(0.0, 0.6, 20)).unwrap();
        assert_eq!(pts[0].n_trivial, 20);
        assert!(pts[0].states.is_empty());
        assert_eq!(pts[0].stats.n_success, 0);
        // ξ = 0.6 leaves only the in-phase pair
        assert_eq!(pts[1].states.len(), 1);
        let st = &pts[1].states[0];
        assert_eq!(st.count, 20);
        assert_eq!(st.rank, Some(0));
        assert!(st.c.iter().all(|&c| c > 0.0));
        // Γ − N = −2ξ for the in-phase pair, so F/(2|ξ|) = −1
        assert!((st.f_scaled.unwrap() + 1.0).abs() < 1e-6);
    }

    #[test]
    fn k4_benchmark_summary() {
        let report = benchmark_orders(
            &[4],
            &BenchmarkConfig {
                trials: cfg(1.1, 0.1, 50),
                refine: RefinePolicy {
                    n_refine: 50,
                    ..Default::default()
                },
            },
        )
        .unwrap();
        let o = &report.orders[0];
        assert_eq!((o.order, o.n_instances, o.argmin_n0, o.argmin_n1), (4, 1, 6, 8));
        assert_eq!(o.argmin_code, "C~");
        assert_eq!(o.min, o.max);
        let inst = &report.instances[0];
        assert_eq!(inst.refined.as_ref().unwrap().n_trials, 50);
        let csv = summary_csv(&report.orders);
        assert!(csv.starts_with("order,n_instances,min,mean,max,argmin_code\n4,1,"));
    }

    #[test]
    fn instance_keys() {
        let k4 = Graph::unweighted(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        assert_eq!(graph_instance_key(&k4).unwrap(), b"C~");
        let ring = Graph::unweighted(16, &(0..16).map(|i| (i, (i + 1) % 16)).collect::<Vec<_>>()).unwrap();
        assert_eq!(
            graph_instance_key(&ring).unwrap(),
            emit_graph6(&ring).unwrap().into_bytes()
        );
    }
}
