//! Network dynamics.
//!
//! The deterministic path integrates the normalized in-phase/quadrature equations
//!
//! ```text
//! dc_j/dt = (−1 + p − (c_j² + s_j²)) c_j + Σ_l ξ_jl c_l
//! ds_j/dt = (−1 − p − (c_j² + s_j²)) s_j + Σ_l ξ_jl s_l
//! ```
//!
//! with an adaptive Dormand–Prince 5(4) pair until the network settles. The
//! stochastic path ([`langevin`]) integrates the c-number Langevin equations of the
//! complex signal amplitudes with Euler–Maruyama steps.

mod dopri;
pub mod langevin;

use std::f64::consts::TAU;
use std::io::{self, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CimError, Result};
use crate::model::SpinConfig;
use crate::spectral::CouplingMatrix;

pub use dopri::{integrate_for, integrate_observed, integrate_to_steady_state, SteadyStateOutcome};

/// In-phase amplitudes at or below this are treated as undecided.
pub const READOUT_FLOOR: f64 = 1e-3;

/// Initial amplitude of every oscillator in a random-phase start.
pub const DEFAULT_INITIAL_AMPLITUDE: f64 = 1e-5;

/// Normalized in-phase and quadrature components of all oscillators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkState {
    pub c: Vec<f64>,
    pub s: Vec<f64>,
    pub t: f64,
}

impl NetworkState {
    pub fn new(c: Vec<f64>, s: Vec<f64>) -> Result<Self> {
        if c.len() != s.len() {
            return Err(CimError::SizeMismatch {
                expected: c.len(),
                got: s.len(),
            });
        }
        if c.iter().chain(&s).any(|v| !v.is_finite()) {
            return Err(CimError::InvalidParameter("state entries must be finite".into()));
        }
        Ok(Self { c, s, t: 0.0 })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            c: vec![0.0; n],
            s: vec![0.0; n],
            t: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    pub fn negated(&self) -> Self {
        Self {
            c: self.c.iter().map(|v| -v).collect(),
            s: self.s.iter().map(|v| -v).collect(),
            t: self.t,
        }
    }

    /// `max_j sqrt(c_j² + s_j²)`.
    pub fn max_amplitude(&self) -> f64 {
        self.c.iter().zip(&self.s).fold(0.0, |m, (c, s)| m.max(c.hypot(*s)))
    }

    /// `[c..., s...]`.
    pub(crate) fn to_flat(&self) -> Vec<f64> {
        self.c.iter().chain(&self.s).copied().collect()
    }

    pub(crate) fn from_flat(y: &[f64], t: f64) -> Self {
        let n = y.len() / 2;
        Self {
            c: y[..n].to_vec(),
            s: y[n..].to_vec(),
            t,
        }
    }
}

/// Normalized pump rate and couplings of the deterministic equations.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedParams {
    pub p: f64,
    pub coupling: CouplingMatrix,
}

impl NormalizedParams {
    pub fn new(p: f64, coupling: CouplingMatrix) -> Result<Self> {
        if !(p.is_finite() && p > 0.0) {
            return Err(CimError::InvalidParameter(format!(
                "pump rate must be positive, got {p}"
            )));
        }
        Ok(Self { p, coupling })
    }

    pub fn size(&self) -> usize {
        self.coupling.size()
    }
}

/// Tolerances and stopping rules of the deterministic integrator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Give up after this much normalized time.
    pub max_time: f64,
    /// Steady when the largest derivative component stays below this...
    pub ss_deriv_tol: f64,
    /// ...for this long.
    pub ss_hold_time: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            max_time: 2000.0,
            ss_deriv_tol: 1e-9,
            ss_hold_time: 1.0,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("max_time", self.max_time),
            ("ss_deriv_tol", self.ss_deriv_tol),
            ("ss_hold_time", self.ss_hold_time),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(CimError::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Writes the derivative of the flat state `y = [c..., s...]` into `dy`.
pub(crate) fn rhs_flat(p: f64, coupling: &CouplingMatrix, y: &[f64], dy: &mut [f64]) {
    let n = coupling.size();
    let (c, s) = y.split_at(n);
    let (dc, ds) = dy.split_at_mut(n);
    for j in 0..n {
        let r = c[j] * c[j] + s[j] * s[j];
        let mut inj_c = 0.0;
        let mut inj_s = 0.0;
        for &(l, xi) in coupling.row(j) {
            inj_c += xi * c[l];
            inj_s += xi * s[l];
        }
        dc[j] = (-1.0 + p - r) * c[j] + inj_c;
        ds[j] = (-1.0 - p - r) * s[j] + inj_s;
    }
}

/// `(dc/dt, ds/dt)` at `state`.
pub fn rhs_deterministic(state: &NetworkState, params: &NormalizedParams) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = params.size();
    if state.c.len() != n || state.s.len() != n {
        return Err(CimError::SizeMismatch {
            expected: n,
            got: state.c.len(),
        });
    }
    let y = state.to_flat();
    let mut dy = vec![0.0; 2 * n];
    rhs_flat(params.p, &params.coupling, &y, &mut dy);
    let ds = dy.split_off(n);
    Ok((dy, ds))
}

/// Every oscillator at amplitude `amplitude` with an independent uniform phase.
pub fn random_initial_state<R: Rng + ?Sized>(n: usize, amplitude: f64, rng: &mut R) -> Result<NetworkState> {
    if !(amplitude.is_finite() && amplitude > 0.0) {
        return Err(CimError::InvalidParameter(format!(
            "initial amplitude must be positive, got {amplitude}"
        )));
    }
    let mut state = NetworkState::zeros(n);
    for j in 0..n {
        let phase = rng.random::<f64>() * TAU;
        let (sin, cos) = phase.sin_cos();
        state.c[j] = amplitude * cos;
        state.s[j] = amplitude * sin;
    }
    Ok(state)
}

/// `σ_j = sign(c_j)`; fails if any `|c_j|` is at or below [`READOUT_FLOOR`].
pub fn spin_readout(state: &NetworkState) -> Result<SpinConfig> {
    let mut spins = Vec::with_capacity(state.len());
    for (index, &c) in state.c.iter().enumerate() {
        if c.abs() <= READOUT_FLOOR {
            return Err(CimError::AmbiguousReadout { index, value: c.abs() });
        }
        spins.push(if c > 0.0 { 1 } else { -1 });
    }
    SpinConfig::new(spins)
}

/// Writes a trajectory as CSV with header `t,c_1,…,c_N,s_1,…,s_N`.
pub fn write_trajectory_csv<W: Write>(out: &mut W, states: &[NetworkState]) -> io::Result<()> {
    let n = states.first().map_or(0, NetworkState::len);
    let mut header = vec!["t".to_string()];
    header.extend((1..=n).map(|j| format!("c_{j}")));
    header.extend((1..=n).map(|j| format!("s_{j}")));
    writeln!(out, "{}", header.join(","))?;
    for st in states {
        let row: Vec<String> = std::iter::once(st.t)
            .chain(st.c.iter().copied())
            .chain(st.s.iter().copied())
            .map(|v| format!("{v:e}"))
            .collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::rng_from_seed;

    fn params(p: f64, coupling: CouplingMatrix) -> NormalizedParams {
        NormalizedParams::new(p, coupling).unwrap()
    }

    #[test]
    fn rhs_examples() {
        let one = params(2.0, CouplingMatrix::zeros(1));
        let st = NetworkState::new(vec![1.0], vec![0.0]).unwrap();
        assert_eq!(rhs_deterministic(&st, &one).unwrap(), (vec![0.0], vec![0.0]));

        let st = NetworkState::new(vec![0.0], vec![1.0]).unwrap();
        assert_eq!(rhs_deterministic(&st, &one).unwrap().1, vec![-4.0]);

        let two = params(1.1, CouplingMatrix::pair(-0.1));
        let st = NetworkState::new(vec![0.1, 0.1], vec![0.0, 0.0]).unwrap();
        let (dc, ds) = rhs_deterministic(&st, &two).unwrap();
        assert!((dc[0] + 0.001).abs() < 1e-15 && (dc[1] + 0.001).abs() < 1e-15);
        assert_eq!(ds, vec![0.0, 0.0]);

        let bad = NetworkState::zeros(3);
        assert!(rhs_deterministic(&bad, &two).is_err());
    }

    #[test]
    fn random_start_has_common_amplitude() {
        let mut rng = rng_from_seed(11);
        let st = random_initial_state(50, 1e-5, &mut rng).unwrap();
        for (c, s) in st.c.iter().zip(&st.s) {
            let r2 = c * c + s * s;
            assert!((r2 - 1e-10).abs() <= 4.0 * f64::EPSILON * 1e-10);
        }
        let again = random_initial_state(50, 1e-5, &mut rng_from_seed(11)).unwrap();
        assert_eq!(st, again);
        assert!(random_initial_state(3, 0.0, &mut rng).is_err());
    }

    #[test]
    fn readout_examples() {
        let st = NetworkState::new(vec![0.3, -0.2], vec![0.0, 0.0]).unwrap();
        assert_eq!(spin_readout(&st).unwrap().spins(), &[1, -1]);
        let st = NetworkState::new(vec![-1.0, -1.0], vec![0.0, 0.0]).unwrap();
        assert_eq!(spin_readout(&st).unwrap().spins(), &[-1, -1]);
        let st = NetworkState::new(vec![1e-15, 1.0], vec![0.0, 0.0]).unwrap();
        assert!(matches!(
            spin_readout(&st),
            Err(CimError::AmbiguousReadout { index: 0, .. })
        ));
    }

    #[test]
    fn trajectory_csv_header() {
        let mut buf = Vec::new();
        let st = NetworkState::new(vec![0.5, -0.5], vec![0.0, 0.25]).unwrap();
        write_trajectory_csv(&mut buf, &[st]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,c_1,c_2,s_1,s_2"));
        assert_eq!(lines.next(), Some("0e0,5e-1,-5e-1,0e0,2.5e-1"));
    }

    #[test]
    fn config_validation() {
        assert!(IntegratorConfig::default().validate().is_ok());
        let bad = IntegratorConfig {
            rel_tol: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        assert!(NormalizedParams::new(0.0, CouplingMatrix::zeros(1)).is_err());
    }
}
