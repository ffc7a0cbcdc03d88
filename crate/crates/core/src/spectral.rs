//! Coupling matrices, the network oscillation threshold, and linear stability of
//! steady states with vanishing quadratures.
//!
//! With `G_jl = −ξ_jl` (zero diagonal), the trivial state loses stability at
//! `p_th = 1 + λ_min(G)`. Around a state with `s = 0` the Jacobian splits into an
//! in-phase block (diagonal `−1 + p − 3c_j²`, off-diagonal `ξ_jl`) and a quadrature
//! block `−Q` (diagonal `−(1 + p + c_j²)`, off-diagonal `ξ_jl`).

use serde::Serialize;

use crate::dynamics::NetworkState;
use crate::error::{CimError, Result};
use crate::model::IsingProblem;

pub use crate::linalg::{symmetric_eigenvalues, SymmetricMatrix};

/// Eigenvalues within this band of zero are reported as marginal.
pub const MARGINAL_BAND: f64 = 1e-8;

/// Quadratures smaller than this count as zero for the block decomposition.
pub const QUADRATURE_ZERO_TOLERANCE: f64 = 1e-9;

/// Mutual-injection coefficients `ξ_jl` of a DOPO network.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    size: usize,
    xi: Vec<f64>,
    // nonzero entries of each row, for the right-hand sides
    rows: Vec<Vec<(usize, f64)>>,
}

impl CouplingMatrix {
    pub fn new(size: usize, xi: Vec<f64>) -> Result<Self> {
        if xi.len() != size * size {
            return Err(CimError::SizeMismatch {
                expected: size * size,
                got: xi.len(),
            });
        }
        for j in 0..size {
            if xi[j * size + j] != 0.0 {
                return Err(CimError::InvalidParameter(
                    "coupling matrix must have a zero diagonal".into(),
                ));
            }
            for l in 0..j {
                let (a, b) = (xi[j * size + l], xi[l * size + j]);
                if !a.is_finite() || a != b {
                    return Err(CimError::NotSymmetric((a - b).abs()));
                }
            }
        }
        let rows = (0..size)
            .map(|j| {
                (0..size)
                    .filter_map(|l| {
                        let v = xi[j * size + l];
                        (v != 0.0).then_some((l, v))
                    })
                    .collect()
            })
            .collect();
        Ok(Self { size, xi, rows })
    }

    pub fn zeros(size: usize) -> Self {
        Self::new(size, vec![0.0; size * size]).expect("zero matrix is valid")
    }

    /// Two oscillators coupled by `xi`.
    pub fn pair(xi: f64) -> Self {
        Self::new(2, vec![0.0, xi, xi, 0.0]).expect("valid 2x2 coupling")
    }

    /// Every pair of oscillators coupled by `xi`.
    pub fn all_to_all(size: usize, xi: f64) -> Self {
        let m = (0..size * size)
            .map(|k| if k / size == k % size { 0.0 } else { xi })
            .collect();
        Self::new(size, m).expect("valid uniform coupling")
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, j: usize, l: usize) -> f64 {
        self.xi[j * self.size + l]
    }

    /// Nonzero `(l, ξ_jl)` of row `j`.
    pub fn row(&self, j: usize) -> &[(usize, f64)] {
        &self.rows[j]
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(Vec::is_empty)
    }

    /// `max_{j,l} |ξ_jl|`.
    pub fn max_abs(&self) -> f64 {
        self.xi.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `G` with `G_jl = −ξ_jl`.
    pub fn g_matrix(&self) -> SymmetricMatrix {
        SymmetricMatrix::new(self.size, self.xi.iter().map(|v| -v).collect()).expect("coupling matrix is symmetric")
    }

    /// `Σ_l ξ_jl x_l` for every `j`.
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        for (o, row) in out.iter_mut().zip(&self.rows) {
            *o = row.iter().map(|&(l, v)| v * x[l]).sum();
        }
    }
}

/// `ξ_jl = χ·J_jl`.
pub fn build_coupling(problem: &IsingProblem, chi: f64) -> Result<CouplingMatrix> {
    if chi == 0.0 || !chi.is_finite() {
        return Err(CimError::ZeroScale);
    }
    CouplingMatrix::new(problem.size(), problem.couplings().iter().map(|&j| chi * j).collect())
}

/// Ascending eigenvalues of `G`.
pub fn g_spectrum(coupling: &CouplingMatrix) -> Vec<f64> {
    symmetric_eigenvalues(&coupling.g_matrix())
}

/// `p_th = 1 + λ_min(G)`.
pub fn network_threshold(coupling: &CouplingMatrix) -> f64 {
    1.0 + g_spectrum(coupling)[0]
}

/// Sufficient condition for every steady state to have vanishing quadratures:
/// `|λ_min(G)| < 1 + p`.
pub fn quadrature_zero_sufficient(coupling: &CouplingMatrix, p: f64) -> bool {
    g_spectrum(coupling)[0].abs() < 1.0 + p
}

/// The matrix `Q` whose negation is the quadrature Jacobian block.
pub fn quadrature_matrix(state: &NetworkState, p: f64, coupling: &CouplingMatrix) -> SymmetricMatrix {
    let n = coupling.size();
    SymmetricMatrix::from_fn(n, |j, l| {
        if j == l {
            1.0 + p + state.c[j] * state.c[j]
        } else {
            -coupling.get(j, l)
        }
    })
    .expect("Q is symmetric")
}

/// The in-phase Jacobian block at a state with `s = 0`.
pub fn inphase_jacobian(state: &NetworkState, p: f64, coupling: &CouplingMatrix) -> SymmetricMatrix {
    let n = coupling.size();
    SymmetricMatrix::from_fn(n, |j, l| {
        if j == l {
            -1.0 + p - 3.0 * state.c[j] * state.c[j]
        } else {
            coupling.get(j, l)
        }
    })
    .expect("in-phase Jacobian is symmetric")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Stable,
    Unstable,
    Marginal,
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub state: NetworkState,
    pub jacobian_spectrum_c: Vec<f64>,
    pub jacobian_spectrum_s: Vec<f64>,
    pub classification: Stability,
}

/// Classifies a steady state with vanishing quadratures by the spectra of both
/// Jacobian blocks.
pub fn jacobian_stability(state: &NetworkState, p: f64, coupling: &CouplingMatrix) -> Result<StabilityReport> {
    let n = coupling.size();
    if state.c.len() != n || state.s.len() != n {
        return Err(CimError::SizeMismatch {
            expected: n,
            got: state.c.len(),
        });
    }
    let max_s = state.s.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max_s > QUADRATURE_ZERO_TOLERANCE {
        return Err(CimError::NonzeroQuadrature(max_s));
    }
    let spec_c = inphase_jacobian(state, p, coupling).eigenvalues();
    let spec_s: Vec<f64> = quadrature_matrix(state, p, coupling)
        .eigenvalues()
        .into_iter()
        .rev()
        .map(|v| -v)
        .collect();
    let all = spec_c.iter().chain(&spec_s);
    let classification = if all.clone().any(|&v| v > MARGINAL_BAND) {
        Stability::Unstable
    } else if all.into_iter().all(|&v| v < -MARGINAL_BAND) {
        Stability::Stable
    } else {
        Stability::Marginal
    };
    Ok(StabilityReport {
        state: state.clone(),
        jacobian_spectrum_c: spec_c,
        jacobian_spectrum_s: spec_s,
        classification,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{maxcut_to_ising, Graph};

    fn k4() -> Graph {
        Graph::unweighted(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap()
    }

    fn k33() -> Graph {
        let edges: Vec<_> = (0..3).flat_map(|a| (3..6).map(move |b| (a, b))).collect();
        Graph::unweighted(6, &edges).unwrap()
    }

    #[test]
    fn coupling_scales_problem() {
        let c = build_coupling(&maxcut_to_ising(&k4()), 0.1).unwrap();
        for j in 0..4 {
            for l in 0..4 {
                let want = if j == l { 0.0 } else { -0.1 };
                assert!((c.get(j, l) - want).abs() < 1e-15);
            }
        }
        let empty = IsingProblem::new(3, vec![0.0; 9]).unwrap();
        assert!(build_coupling(&empty, 0.5).unwrap().is_zero());
        let ferro = IsingProblem::from_pairs(2, &[(0, 1, 1.0)]).unwrap();
        assert_eq!(build_coupling(&ferro, 0.6).unwrap().get(0, 1), 0.6);
        assert_eq!(build_coupling(&ferro, 0.0), Err(CimError::ZeroScale));
    }

    #[test]
    fn threshold_examples() {
        assert!((network_threshold(&CouplingMatrix::pair(-0.1)) - 0.9).abs() < 1e-12);
        let k4c = build_coupling(&maxcut_to_ising(&k4()), 0.1).unwrap();
        assert!((network_threshold(&k4c) - 0.9).abs() < 1e-12);
        let k33c = build_coupling(&maxcut_to_ising(&k33()), 0.1).unwrap();
        assert!((g_spectrum(&k33c)[0] + 0.3).abs() < 1e-12);
        assert!((network_threshold(&k33c) - 0.7).abs() < 1e-12);
        assert_eq!(network_threshold(&CouplingMatrix::zeros(3)), 1.0);
    }

    #[test]
    fn quadrature_condition_examples() {
        let k33c = build_coupling(&maxcut_to_ising(&k33()), 0.1).unwrap();
        assert!(quadrature_zero_sufficient(&k33c, 1.1));
        assert!(!quadrature_zero_sufficient(&CouplingMatrix::pair(2.5), 1.0));
        assert!(quadrature_zero_sufficient(&CouplingMatrix::zeros(4), 0.01));
    }

    #[test]
    fn stability_examples() {
        let trivial = NetworkState::zeros(4);
        let k4c = build_coupling(&maxcut_to_ising(&k4()), 0.1).unwrap();
        let r = jacobian_stability(&trivial, 1.0, &k4c).unwrap();
        assert_eq!(r.classification, Stability::Unstable);

        let cu = 1.1f64.sqrt();
        let state = NetworkState::new(vec![cu, -cu], vec![0.0, 0.0]).unwrap();
        let r = jacobian_stability(&state, 2.0, &CouplingMatrix::pair(-0.1)).unwrap();
        assert_eq!(r.classification, Stability::Stable);

        let one = NetworkState::new(vec![1.0], vec![0.0]).unwrap();
        let r = jacobian_stability(&one, 2.0, &CouplingMatrix::zeros(1)).unwrap();
        assert_eq!(r.jacobian_spectrum_c, vec![-2.0]);
        assert_eq!(r.jacobian_spectrum_s, vec![-4.0]);
        assert_eq!(r.classification, Stability::Stable);

        // exactly at the single-oscillator threshold the trivial state is marginal
        let r = jacobian_stability(&NetworkState::zeros(1), 1.0, &CouplingMatrix::zeros(1)).unwrap();
        assert_eq!(r.classification, Stability::Marginal);
    }

    #[test]
    fn stability_requires_zero_quadrature() {
        let state = NetworkState::new(vec![1.0], vec![0.1]).unwrap();
        assert!(matches!(
            jacobian_stability(&state, 2.0, &CouplingMatrix::zeros(1)),
            Err(CimError::NonzeroQuadrature(_))
        ));
    }

    #[test]
    fn nonzero_coupling_lowers_threshold() {
        for xi in [-0.7, -0.01, 0.01, 0.3] {
            for n in 2..6 {
                assert!(network_threshold(&CouplingMatrix::all_to_all(n, xi)) < 1.0);
            }
        }
    }
}
