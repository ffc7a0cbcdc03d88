//! End-to-end acceptance checks. Runs every criterion and prints one PASS/FAIL
//! line each. With `CIM_ACCEPTANCE_STRICT=1` the process exits non-zero when any
//! criterion fails.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cim_core::analysis::{perturbation_scaling, two_dopo_diagram, DiagramStability};
use cim_core::dynamics::langevin::{linearized_variances, stationary_variances, PhysicalParams, VarianceConfig};
use cim_core::dynamics::NetworkState;
use cim_core::graphs::{enumerate_cubic, parse_graph6};
use cim_core::harness::{
    benchmark_orders, run_langevin_trials, run_trials, run_trials_with_states, sweep_coupling, BenchmarkConfig,
    BenchmarkReport, LangevinTrialConfig, RefinePolicy, TrialConfig,
};
use cim_core::model::{brute_force_spectrum, maxcut_to_ising, IsingProblem};
use cim_core::spectral::{build_coupling, jacobian_stability, network_threshold, CouplingMatrix};
use cim_core::Exec;

const MASTER_SEED: u64 = 1;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn benchmark_config() -> BenchmarkConfig {
    BenchmarkConfig {
        trials: TrialConfig {
            p: 1.1,
            chi: 0.1,
            n_trials: 100,
            master_seed: MASTER_SEED,
            ..Default::default()
        },
        refine: RefinePolicy::default(),
    }
}

fn table_benchmark() -> BenchmarkReport {
    benchmark_orders(&[4, 6, 8, 10], &benchmark_config()).expect("benchmark runs")
}

fn cubic_counts() -> Outcome {
    let t = Instant::now();
    let counts: Vec<usize> = (4..=14)
        .step_by(2)
        .map(|n| enumerate_cubic(n).map(|v| v.len()).unwrap_or(0))
        .collect();
    let secs = t.elapsed().as_secs_f64();
    check(
        counts == [1, 2, 5, 19, 85, 509] && secs < 60.0,
        format!("counts {counts:?} in {secs:.1} s"),
    )
}

fn worst_case_success(report: &BenchmarkReport) -> Outcome {
    let expected = [(4, 0.932), (6, 1.00), (8, 0.413), (10, 0.538)];
    let mut ok = true;
    let mut parts = Vec::new();
    for ((order, want), o) in expected.iter().zip(&report.orders) {
        let n = report
            .instances
            .iter()
            .find(|i| i.canonical_code == o.argmin_code)
            .map_or(0, |i| i.final_stats().n_trials);
        let good = o.order == *order && (o.min - want).abs() <= 0.05 && n >= 10_000;
        ok &= good;
        parts.push(format!("N={order} q={:.4} (reference {want}, {n} trials)", o.min));
    }
    check(ok, parts.join("; "))
}

fn spectrum_columns(report: &BenchmarkReport) -> Outcome {
    let k4 = &enumerate_cubic(4).expect("order 4")[0];
    let spec = brute_force_spectrum(&maxcut_to_ising(&k4.graph)).expect("spectrum");
    let mut ok = (spec.n0, spec.n1) == (6, 8);
    let mut parts = vec![format!("N=4 ({}, {})", spec.n0, spec.n1)];
    for (order, want) in [(6, (2, 12)), (8, (6, 14)), (10, (6, 14))] {
        let present = report
            .instances
            .iter()
            .any(|i| i.order == order && (i.n0, i.n1) == want);
        let o = report.orders.iter().find(|o| o.order == order).expect("order present");
        let argmin = (o.argmin_n0, o.argmin_n1);
        ok &= present && argmin == want;
        parts.push(format!(
            "N={order} argmin {argmin:?} (reference {want:?}, present: {present})"
        ));
    }
    check(ok, parts.join("; "))
}

fn two_spin_sweep() -> Outcome {
    let problem = IsingProblem::from_pairs(2, &[(0, 1, 1.0)]).expect("pair");
    let grid = [0.01, 0.05, 0.1, 0.2, 0.3, 0.5, 0.6];
    let cfg = TrialConfig {
        p: 2.0,
        n_trials: 10_000,
        master_seed: MASTER_SEED,
        ..Default::default()
    };
    let pts = sweep_coupling(&problem, b"ferromagnetic pair", &grid, &cfg).expect("sweep");
    let q: Vec<f64> = pts.iter().map(|p| p.stats.success_prob).collect();
    let sd: Vec<f64> = pts.iter().map(|p| p.stats.group_std.unwrap_or(0.0)).collect();
    let monotone = (1..q.len()).all(|k| q[k] >= q[k - 1] - 2.0 * sd[k].max(sd[k - 1]));
    let ok = q[6] == 1.0 && (0.45..=0.55).contains(&q[0]) && monotone;
    let listing: Vec<String> = grid
        .iter()
        .zip(q.iter().zip(&sd))
        .map(|(x, (q, s))| format!("{x}:{q:.4}±{s:.4}"))
        .collect();
    check(ok, format!("{} monotone={monotone}", listing.join(" ")))
}

fn steady_state_residual(c: [f64; 2], p: f64, xi: f64) -> f64 {
    let r1 = c[0].powi(3) + (1.0 - p) * c[0] - xi * c[1];
    let r2 = c[1].powi(3) + (1.0 - p) * c[1] - xi * c[0];
    r1.abs().max(r2.abs())
}

fn phase_diagram() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(MASTER_SEED);
    let (mut points, mut compared, mut disagree, mut worst_residual) = (0, 0, 0, 0.0f64);
    while points < 200 {
        let p: f64 = if points % 2 == 0 {
            rng.random_range(0.05..1.0)
        } else {
            rng.random_range(1.0..3.0)
        };
        let q = p - 1.0;
        let bounds: Vec<f64> = if p <= 1.0 {
            vec![-1.0 - p, q, -q, 1.0 + p]
        } else {
            vec![-1.0 - p, -q, -q / 2.0, q / 2.0, q, 1.0 + p]
        };
        let k = rng.random_range(0..bounds.len() - 1);
        let (lo, hi) = (bounds[k], bounds[k + 1]);
        let margin = 0.02 * (hi - lo);
        let xi = rng.random_range(lo + margin..hi - margin);
        let d = two_dopo_diagram(p, xi).expect("diagram");
        points += 1;
        for st in &d.states {
            match st.stability {
                DiagramStability::Absent => continue,
                DiagramStability::Marginal => {
                    disagree += 1;
                    continue;
                }
                _ => {}
            }
            worst_residual = worst_residual.max(steady_state_residual([st.c1, st.c2], p, xi));
            let state = NetworkState::new(vec![st.c1, st.c2], vec![0.0; 2]).expect("state");
            let rep = jacobian_stability(&state, p, &CouplingMatrix::pair(xi)).expect("jacobian");
            compared += 1;
            if DiagramStability::from(rep.classification) != st.stability {
                disagree += 1;
            }
        }
    }
    check(
        disagree == 0 && worst_residual < 1e-12,
        format!(
            "{points} points, {compared} states compared, {disagree} disagreements, max residual {worst_residual:.1e}"
        ),
    )
}

fn threshold_law() -> Outcome {
    let (mut instances, mut failures) = (0, Vec::new());
    for order in [4, 6, 8, 10] {
        for g in enumerate_cubic(order).expect("enumerate") {
            instances += 1;
            let problem = maxcut_to_ising(&g.graph);
            let p_th = network_threshold(&build_coupling(&problem, 0.1).expect("coupling"));
            let key = g.canonical_code.as_bytes();
            let base = TrialConfig {
                n_trials: 100,
                master_seed: MASTER_SEED,
                ..Default::default()
            };
            let (below, states) =
                run_trials_with_states(&problem, key, &TrialConfig { p: p_th - 0.05, ..base }).expect("below");
            let all_trivial = below.stats.n_unconverged == 0 && states.iter().all(|s| s.max_amplitude() < 1e-6);
            let (_, states) =
                run_trials_with_states(&problem, key, &TrialConfig { p: p_th + 0.05, ..base }).expect("above");
            let any_nontrivial = states.iter().any(|s| s.max_amplitude() >= 1e-6);
            if !(all_trivial && any_nontrivial) {
                failures.push(g.canonical_code.clone());
            }
        }
    }
    check(
        failures.is_empty(),
        format!("{instances} instances, failures: {failures:?}"),
    )
}

fn decay_scaling() -> Outcome {
    let pts = perturbation_scaling(4, 2.0, &[0.04, 0.02, 0.01]).expect("scaling");
    let ratios: Vec<f64> = pts.windows(2).map(|w| w[0].max_error / w[1].max_error).collect();
    let all_solved = pts.iter().all(|p| p.failed_patterns == 0);
    check(
        all_solved && ratios.iter().all(|r| (6.0..=10.0).contains(r)),
        format!(
            "errors {:?}, ratios {ratios:.3?}",
            pts.iter().map(|p| p.max_error).collect::<Vec<_>>()
        ),
    )
}

fn langevin_equivalence(report: &BenchmarkReport) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for order in [4, 8] {
        let code = &report
            .orders
            .iter()
            .find(|o| o.order == order)
            .expect("order present")
            .argmin_code;
        let g = parse_graph6(code).expect("canonical code is graph6");
        let problem = maxcut_to_ising(&g);
        let det = run_trials(
            &problem,
            code.as_bytes(),
            &TrialConfig {
                n_trials: 1000,
                master_seed: MASTER_SEED,
                ..Default::default()
            },
        )
        .expect("deterministic");
        let sto = run_langevin_trials(
            &problem,
            code.as_bytes(),
            &LangevinTrialConfig {
                n_trials: 1000,
                master_seed: MASTER_SEED,
                ..Default::default()
            },
        )
        .expect("langevin");
        let se = (det.stats.binomial_se().powi(2) + sto.stats.binomial_se().powi(2)).sqrt();
        let diff = (det.stats.success_prob - sto.stats.success_prob).abs();
        let good = diff <= 3.0 * se && sto.stats.n_unconverged == 0;
        ok &= good;
        parts.push(format!(
            "N={order} deterministic {:.3} vs Langevin {:.3} (|Δ| {diff:.3} ≤ 3σ {:.3}: {good})",
            det.stats.success_prob,
            sto.stats.success_prob,
            3.0 * se
        ));
    }
    check(ok, parts.join("; "))
}

fn variance_oracle() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    let mut inphase = Vec::new();
    for p in [0.0, 0.5, 0.9] {
        let params = PhysicalParams::with_normalized_pump(1.0, 100.0, 1e-4, p).expect("params");
        let cfg = VarianceConfig {
            n_paths: 1000,
            // the in-phase variance relaxes at rate γ_s(1 − p)
            burn_in: 20.0 / (1.0 - p),
            window: 100.0,
            sample_interval: 1.0,
            dtau: None,
        };
        let est = stationary_variances(&params, &cfg, MASTER_SEED, Exec::Parallel).expect("variances");
        let (_, want) = linearized_variances(p);
        let rel = est.var_quadrature / want - 1.0;
        ok &= rel.abs() <= 0.05;
        inphase.push(est.var_inphase);
        parts.push(format!(
            "p={p}: quadrature {:.4} vs {want:.4} ({:+.1}%)",
            est.var_quadrature,
            100.0 * rel
        ));
    }
    let growth = inphase[2] / inphase[0];
    ok &= growth > 5.0;
    parts.push(format!("in-phase growth {growth:.2}"));
    check(ok, parts.join("; "))
}

fn determinism(first: &BenchmarkReport) -> Outcome {
    let a = serde_json::to_string(first).expect("json");
    let b = serde_json::to_string(&table_benchmark()).expect("json");
    check(a == b, format!("{} bytes, identical: {}", a.len(), a == b))
}

fn main() {
    let started = Instant::now();
    let mut failed = Vec::new();
    let mut report = |n: usize, name: &str, outcome: Outcome, t: Instant| {
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("criterion {n:>2} PASS  {name} [{secs:.1} s]: {d}"),
            Err(d) => {
                println!("criterion {n:>2} FAIL  {name} [{secs:.1} s]: {d}");
                failed.push(n);
            }
        }
    };

    let t = Instant::now();
    report(1, "cubic graph counts", cubic_counts(), t);
    let t = Instant::now();
    let bench = table_benchmark();
    report(2, "worst-case success probabilities", worst_case_success(&bench), t);
    let t = Instant::now();
    report(3, "spectrum degeneracies", spectrum_columns(&bench), t);
    let t = Instant::now();
    report(4, "two-spin coupling sweep", two_spin_sweep(), t);
    let t = Instant::now();
    report(5, "two-oscillator phase diagram", phase_diagram(), t);
    let t = Instant::now();
    report(6, "oscillation threshold", threshold_law(), t);
    let t = Instant::now();
    report(7, "decay-rate mapping scaling", decay_scaling(), t);
    let t = Instant::now();
    report(8, "Langevin vs deterministic", langevin_equivalence(&bench), t);
    let t = Instant::now();
    report(9, "stationary variances", variance_oracle(), t);
    let t = Instant::now();
    report(10, "determinism", determinism(&bench), t);

    println!(
        "acceptance: {} of 10 criteria passed in {:.1} s",
        10 - failed.len(),
        started.elapsed().as_secs_f64()
    );
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        if std::env::var("CIM_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
            std::process::exit(1);
        }
    }
}
