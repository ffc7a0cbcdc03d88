//! Steady-state analysis: photon-decay-rate mapping, outcome ranks, the closed-form
//! two-oscillator phase diagram and the perturbative error scaling.

use serde::Serialize;

use crate::dynamics::{spin_readout, NetworkState, NormalizedParams};
use crate::error::{CimError, Result};
use crate::linalg::solve_linear;
use crate::model::{ising_energy, CutSpectrum, SpinConfig};
use crate::spectral::{CouplingMatrix, Stability};

/// Overall photon decay rate of a steady state and its Ising-energy estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayReport {
    /// `Γ = Σ_j (p − c_j² − s_j²)`.
    pub gamma: f64,
    /// `F = Γ − N`.
    pub f_excess: f64,
    /// `−Σ_{j≠l} ξ_jl σ_j σ_l` for the read-out spins.
    pub ising_estimate: f64,
    /// `|F − ising_estimate|`.
    pub mapping_error: f64,
}

pub fn decay_report(state: &NetworkState, params: &NormalizedParams) -> Result<DecayReport> {
    let n = params.size();
    if state.len() != n {
        return Err(CimError::SizeMismatch {
            expected: n,
            got: state.len(),
        });
    }
    let spins = spin_readout(state)?;
    let gamma: f64 = state
        .c
        .iter()
        .zip(&state.s)
        .map(|(c, s)| params.p - c * c - s * s)
        .sum();
    let f_excess = gamma - n as f64;
    let ising_estimate = ising_estimate(&params.coupling, &spins);
    Ok(DecayReport {
        gamma,
        f_excess,
        ising_estimate,
        mapping_error: (f_excess - ising_estimate).abs(),
    })
}

fn ising_estimate(coupling: &CouplingMatrix, spins: &SpinConfig) -> f64 {
    let mut sum = 0.0;
    for j in 0..coupling.size() {
        for &(l, xi) in coupling.row(j) {
            sum += xi * spins.get(j) * spins.get(l);
        }
    }
    -sum
}

/// Index of the level of `spins` in `spectrum`: 0 for a maximum cut, 1 for the
/// second-largest cut, and so on.
pub fn classify_outcome(spins: &SpinConfig, spectrum: &CutSpectrum) -> Result<usize> {
    let energy = ising_energy(spectrum.problem(), spins)?;
    spectrum
        .level_of_energy(energy)
        .ok_or_else(|| CimError::InvalidParameter(format!("energy {energy} is not a level of the spectrum")))
}

/// Steady states of two coupled oscillators with zero quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DiagramLabel {
    /// `(0, 0)`.
    Trivial,
    /// `(c_g, c_g)`.
    Cg,
    /// `(c_u, −c_u)`.
    Cu,
    /// `(c_s, c_a)`.
    Cs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DiagramStability {
    Stable,
    Unstable,
    /// The state does not exist at these parameters.
    Absent,
    /// On an interval endpoint or outside the tabulated region.
    Marginal,
}

impl From<Stability> for DiagramStability {
    fn from(s: Stability) -> Self {
        match s {
            Stability::Stable => Self::Stable,
            Stability::Unstable => Self::Unstable,
            Stability::Marginal => Self::Marginal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagramState {
    pub label: DiagramLabel,
    pub c1: f64,
    pub c2: f64,
    pub stability: DiagramStability,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoDopoDiagram {
    pub p: f64,
    pub xi: f64,
    /// Always in the order trivial, cg, cu, cs. Absent states carry zero amplitudes.
    pub states: Vec<DiagramState>,
}

impl TwoDopoDiagram {
    pub fn state(&self, label: DiagramLabel) -> &DiagramState {
        self.states
            .iter()
            .find(|s| s.label == label)
            .expect("every label is listed")
    }
}

/// Closed-form steady states and their tabulated stability for the given
/// normalized pump `p` and coupling `ξ`.
pub fn two_dopo_diagram(p: f64, xi: f64) -> Result<TwoDopoDiagram> {
    if !(p.is_finite() && p > 0.0) || !xi.is_finite() {
        return Err(CimError::InvalidParameter(format!(
            "diagram needs p > 0 and finite xi, got p = {p}, xi = {xi}"
        )));
    }
    use DiagramStability::{Absent as A, Stable as S, Unstable as U};
    let q = p - 1.0;
    // rows: (lower, upper, [trivial, cg, cu, cs])
    let rows: Vec<(f64, f64, [DiagramStability; 4])> = if p <= 1.0 {
        vec![
            (-q, 1.0 + p, [U, S, A, A]),
            (q, -q, [S, A, A, A]),
            (-1.0 - p, q, [U, A, S, A]),
        ]
    } else {
        vec![
            (q, p + 1.0, [U, S, A, A]),
            (q / 2.0, q, [U, S, U, A]),
            (-q / 2.0, q / 2.0, [U, S, S, U]),
            (-q, -q / 2.0, [U, U, S, A]),
            (-1.0 - p, -q, [U, A, S, A]),
        ]
    };
    let labels = rows
        .iter()
        .find(|(lo, hi, _)| lo < &xi && &xi < hi)
        .map(|r| r.2)
        .unwrap_or([DiagramStability::Marginal; 4]);

    let root = |v: f64| if v > 0.0 { v.sqrt() } else { 0.0 };
    let cg = root(q + xi);
    let cu = root(q - xi);
    let disc = q * q - 4.0 * xi * xi;
    let (cs, ca) = if q > 0.0 && disc >= 0.0 {
        let s = root((q + disc.sqrt()) / 2.0);
        if s > 0.0 {
            (s, -xi / s)
        } else {
            (0.0, 0.0)
        }
    } else {
        (0.0, 0.0)
    };
    let exists = [true, q + xi > 0.0, q - xi > 0.0, q > 0.0 && disc >= 0.0 && cs > 0.0];
    let coords = [(0.0, 0.0), (cg, cg), (cu, -cu), (cs, ca)];
    let names = [
        DiagramLabel::Trivial,
        DiagramLabel::Cg,
        DiagramLabel::Cu,
        DiagramLabel::Cs,
    ];
    let states = (0..4)
        .map(|k| {
            let stability = match labels[k] {
                DiagramStability::Marginal if !exists[k] => DiagramStability::Absent,
                other => other,
            };
            let (c1, c2) = if stability == DiagramStability::Absent {
                (0.0, 0.0)
            } else {
                coords[k]
            };
            DiagramState {
                label: names[k],
                c1,
                c2,
                stability,
            }
        })
        .collect();
    Ok(TwoDopoDiagram { p, xi, states })
}

/// Largest mapping error over spin patterns at one coupling strength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingPoint {
    pub epsilon: f64,
    /// `max |F − ising_estimate|` over the patterns whose branch was found.
    pub max_error: f64,
    pub solved_patterns: usize,
    /// Patterns whose branch could not be followed from the uncoupled state.
    pub failed_patterns: usize,
}

const NEWTON_TOL: f64 = 1e-13;
const NEWTON_MAX_ITER: usize = 100;

fn inphase_residual(c: &[f64], p: f64, eps: f64, out: &mut [f64]) -> f64 {
    let total: f64 = c.iter().sum();
    let mut norm = 0.0f64;
    for (j, r) in out.iter_mut().enumerate() {
        *r = c[j] * c[j] * c[j] + (1.0 - p) * c[j] - eps * (total - c[j]);
        norm = norm.max(r.abs());
    }
    norm
}

/// Newton iteration on the zero-quadrature steady-state equations with all-to-all
/// coupling `ε`, started from `σ_j √(p − 1)`.
fn solve_branch(spins: &[f64], p: f64, eps: f64) -> Option<Vec<f64>> {
    let n = spins.len();
    let mut c: Vec<f64> = spins.iter().map(|s| s * (p - 1.0).sqrt()).collect();
    let mut r = vec![0.0; n];
    let mut norm = inphase_residual(&c, p, eps, &mut r);
    let mut trial = vec![0.0; n];
    let mut trial_r = vec![0.0; n];
    for _ in 0..NEWTON_MAX_ITER {
        if norm <= NEWTON_TOL {
            break;
        }
        let jac: Vec<f64> = (0..n * n)
            .map(|k| {
                let (i, j) = (k / n, k % n);
                if i == j {
                    3.0 * c[i] * c[i] + 1.0 - p
                } else {
                    -eps
                }
            })
            .collect();
        let step = solve_linear(jac, r.iter().map(|v| -v).collect())?;
        let mut lambda = 1.0;
        loop {
            for j in 0..n {
                trial[j] = c[j] + lambda * step[j];
            }
            let trial_norm = inphase_residual(&trial, p, eps, &mut trial_r);
            if trial_norm < norm || lambda < 1e-6 {
                c.copy_from_slice(&trial);
                r.copy_from_slice(&trial_r);
                norm = trial_norm;
                break;
            }
            lambda *= 0.5;
        }
    }
    let same_branch = c.iter().zip(spins).all(|(c, s)| c * s > 0.0);
    (norm <= NEWTON_TOL && same_branch).then_some(c)
}

/// For each `ε`, the largest `|F − ising_estimate|` over all spin patterns with
/// `σ_1 = +1` of `n` oscillators coupled all-to-all with strength `ε` at pump `p`.
pub fn perturbation_scaling(n: usize, p: f64, epsilons: &[f64]) -> Result<Vec<ScalingPoint>> {
    if !(p.is_finite() && p > 1.0) {
        return Err(CimError::InvalidParameter(format!("pump must exceed 1, got {p}")));
    }
    if !(1..=20).contains(&n) {
        return Err(CimError::OrderOutOfRange {
            order: n,
            min: 1,
            max: 20,
        });
    }
    let patterns = 1u64 << (n - 1);
    let mut out = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        if !eps.is_finite() {
            return Err(CimError::InvalidParameter(format!("epsilon must be finite, got {eps}")));
        }
        let mut point = ScalingPoint {
            epsilon: eps,
            max_error: 0.0,
            solved_patterns: 0,
            failed_patterns: 0,
        };
        for mask in 0..patterns {
            // bit j−1 of the mask flips spin j for j ≥ 1
            let spins: Vec<f64> = (0..n)
                .map(|j| if j > 0 && mask >> (j - 1) & 1 == 1 { -1.0 } else { 1.0 })
                .collect();
            let Some(c) = solve_branch(&spins, p, eps) else {
                point.failed_patterns += 1;
                continue;
            };
            let gamma: f64 = c.iter().map(|c| p - c * c).sum();
            let sum_s: f64 = spins.iter().sum();
            let pair_sum = sum_s * sum_s - n as f64;
            let estimate = -eps * pair_sum;
            point.max_error = point.max_error.max((gamma - n as f64 - estimate).abs());
            point.solved_patterns += 1;
        }
        out.push(point);
    }
    Ok(out)
}
