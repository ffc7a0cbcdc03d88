//! Dormand–Prince 5(4) with FSAL and per-component error control.

use serde::Serialize;

use super::{rhs_flat, IntegratorConfig, NetworkState, NormalizedParams};
use crate::error::{CimError, Result};

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// fifth-order weights minus the embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;
const MIN_STEP: f64 = 1e-12;
// cap on h·ρ for the local stiffness estimate ρ, well inside the stability region
const MAX_STIFF_PRODUCT: f64 = 2.0;

/// Result of a steady-state integration.
#[derive(Debug, Clone, Serialize)]
pub struct SteadyStateOutcome {
    pub state: NetworkState,
    pub converged: bool,
    pub accepted_steps: u64,
    pub rejected_steps: u64,
    /// `max_j |dx_j/dt|` at the final state.
    pub final_derivative: f64,
}

struct Stepper<'a> {
    p: f64,
    params: &'a NormalizedParams,
    rtol: f64,
    atol: f64,
    y: Vec<f64>,
    t: f64,
    h: f64,
    // derivative at (t, y), reused as the first stage (FSAL)
    k1: Vec<f64>,
    k: [Vec<f64>; 6],
    tmp: Vec<f64>,
    y_new: Vec<f64>,
    accepted: u64,
    rejected: u64,
}

impl<'a> Stepper<'a> {
    fn new(x0: &NetworkState, params: &'a NormalizedParams, cfg: &IntegratorConfig) -> Self {
        let y = x0.to_flat();
        let dim = y.len();
        let mut k1 = vec![0.0; dim];
        rhs_flat(params.p, &params.coupling, &y, &mut k1);
        let mut s = Self {
            p: params.p,
            params,
            rtol: cfg.rel_tol,
            atol: cfg.abs_tol,
            y,
            t: x0.t,
            h: 0.0,
            k1,
            k: std::array::from_fn(|_| vec![0.0; dim]),
            tmp: vec![0.0; dim],
            y_new: vec![0.0; dim],
            accepted: 0,
            rejected: 0,
        };
        s.h = s.initial_step();
        s
    }

    /// Starting step from the scaled size of the state and its derivative.
    fn initial_step(&self) -> f64 {
        let (mut d0, mut d1) = (0.0f64, 0.0f64);
        for (y, f) in self.y.iter().zip(&self.k1) {
            let sc = self.atol + self.rtol * y.abs();
            d0 = d0.max(y.abs() / sc);
            d1 = d1.max(f.abs() / sc);
        }
        let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        h.clamp(1e-6, 1.0)
    }

    fn max_derivative(&self) -> f64 {
        self.k1.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Attempts one step of size `self.h` (clipped to `t_limit`); returns whether it
    /// was accepted.
    fn try_step(&mut self, t_limit: f64) -> Result<bool> {
        let h = self.h.min(t_limit - self.t);
        let n = self.y.len();
        let y = &self.y;
        let k1 = &self.k1;
        let [k2, k3, k4, k5, k6, k7] = &mut self.k;
        let tmp = &mut self.tmp;

        for i in 0..n {
            tmp[i] = y[i] + h * A21 * k1[i];
        }
        rhs_flat(self.p, &self.params.coupling, tmp, k2);
        for i in 0..n {
            tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        rhs_flat(self.p, &self.params.coupling, tmp, k3);
        for i in 0..n {
            tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        rhs_flat(self.p, &self.params.coupling, tmp, k4);
        for i in 0..n {
            tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        rhs_flat(self.p, &self.params.coupling, tmp, k5);
        for i in 0..n {
            tmp[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        rhs_flat(self.p, &self.params.coupling, tmp, k6);
        let y_new = &mut self.y_new;
        for i in 0..n {
            y_new[i] = y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        rhs_flat(self.p, &self.params.coupling, y_new, k7);

        let mut err: f64 = 0.0;
        for i in 0..n {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
            err = err.max(e.abs() / sc);
        }
        if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
            return Err(CimError::InvalidParameter(
                "integration diverged to a non-finite state".into(),
            ));
        }

        let factor = if err == 0.0 {
            MAX_FACTOR
        } else {
            (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
        };
        if err <= 1.0 {
            // stages 6 and 7 share the same abscissa, so their difference probes the Jacobian
            let (mut dk, mut dy) = (0.0f64, 0.0f64);
            for i in 0..n {
                dk = dk.max((k7[i] - k6[i]).abs());
                dy = dy.max((y_new[i] - tmp[i]).abs());
            }
            let stiffness = if dy > 0.0 { dk / dy } else { 0.0 };
            std::mem::swap(&mut self.y, &mut self.y_new);
            std::mem::swap(&mut self.k1, &mut self.k[5]);
            self.t += h;
            // a step clipped at t_limit keeps the controller's proposal for the next one
            if h >= self.h {
                self.h = h * factor;
            }
            if stiffness > 0.0 {
                self.h = self.h.min(MAX_STIFF_PRODUCT / stiffness);
            }
            self.accepted += 1;
            Ok(true)
        } else {
            self.h = h * factor.min(1.0);
            self.rejected += 1;
            if self.h < MIN_STEP {
                return Err(CimError::InvalidParameter(format!(
                    "step size underflow at t = {}",
                    self.t
                )));
            }
            Ok(false)
        }
    }

    fn state(&self) -> NetworkState {
        NetworkState::from_flat(&self.y, self.t)
    }
}

fn check_inputs(x0: &NetworkState, params: &NormalizedParams, cfg: &IntegratorConfig) -> Result<()> {
    cfg.validate()?;
    let n = params.size();
    if x0.c.len() != n || x0.s.len() != n {
        return Err(CimError::SizeMismatch {
            expected: n,
            got: x0.c.len(),
        });
    }
    if x0.c.iter().chain(&x0.s).any(|v| !v.is_finite()) {
        return Err(CimError::InvalidParameter("initial state must be finite".into()));
    }
    Ok(())
}

/// Integrates until the largest derivative component stays below
/// `cfg.ss_deriv_tol` for `cfg.ss_hold_time`, or until `cfg.max_time` has elapsed
/// (then `converged` is false).
pub fn integrate_to_steady_state(
    x0: &NetworkState,
    params: &NormalizedParams,
    cfg: &IntegratorConfig,
) -> Result<SteadyStateOutcome> {
    integrate_observed(x0, params, cfg, 0, |_| {})
}

/// Like [`integrate_to_steady_state`], also calling `observer` on the initial
/// state, every `stride`-th accepted step (never if `stride == 0`) and the final
/// state.
pub fn integrate_observed(
    x0: &NetworkState,
    params: &NormalizedParams,
    cfg: &IntegratorConfig,
    stride: u64,
    mut observer: impl FnMut(&NetworkState),
) -> Result<SteadyStateOutcome> {
    check_inputs(x0, params, cfg)?;
    let mut st = Stepper::new(x0, params, cfg);
    let t_end = x0.t + cfg.max_time;
    if stride > 0 {
        observer(&st.state());
    }
    let mut quiet_since = (st.max_derivative() < cfg.ss_deriv_tol).then_some(st.t);
    let mut converged = false;
    while st.t < t_end {
        if !st.try_step(t_end)? {
            continue;
        }
        if stride > 0 && st.accepted.is_multiple_of(stride) {
            observer(&st.state());
        }
        if st.max_derivative() < cfg.ss_deriv_tol {
            let since = *quiet_since.get_or_insert(st.t);
            if st.t - since >= cfg.ss_hold_time {
                converged = true;
                break;
            }
        } else {
            quiet_since = None;
        }
    }
    let state = st.state();
    if stride > 0 && !st.accepted.is_multiple_of(stride) {
        observer(&state);
    }
    Ok(SteadyStateOutcome {
        final_derivative: st.max_derivative(),
        state,
        converged,
        accepted_steps: st.accepted,
        rejected_steps: st.rejected,
    })
}

/// Integrates to exactly `x0.t + duration`, ignoring the steady-state rule.
pub fn integrate_for(
    x0: &NetworkState,
    params: &NormalizedParams,
    cfg: &IntegratorConfig,
    duration: f64,
) -> Result<NetworkState> {
    check_inputs(x0, params, cfg)?;
    let mut st = Stepper::new(x0, params, cfg);
    let t_end = x0.t + duration;
    while t_end - st.t > 1e-14 * t_end.abs().max(1.0) {
        st.try_step(t_end)?;
    }
    let mut out = st.state();
    out.t = t_end;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const C2: f64 = 1.0 / 5.0;
    const C3: f64 = 3.0 / 10.0;
    const C4: f64 = 4.0 / 5.0;
    const C5: f64 = 8.0 / 9.0;
    use crate::dynamics::random_initial_state;
    use crate::seeding::rng_from_seed;
    use crate::spectral::CouplingMatrix;

    fn params(p: f64, coupling: CouplingMatrix) -> NormalizedParams {
        NormalizedParams::new(p, coupling).unwrap()
    }

    /// Solution of dc/dt = a c − c³ from c0.
    fn logistic(c0: f64, a: f64, t: f64) -> f64 {
        let e = (2.0 * a * t).exp();
        c0 * (a * t).exp() / (1.0 + c0 * c0 * (e - 1.0) / a).sqrt()
    }

    #[test]
    fn tableau_is_consistent() {
        // rows sum to the nodes; both weight sets sum to one
        let rows = [
            (A21, C2),
            (A31 + A32, C3),
            (A41 + A42 + A43, C4),
            (A51 + A52 + A53 + A54, C5),
            (A61 + A62 + A63 + A64 + A65, 1.0),
            (A71 + A73 + A74 + A75 + A76, 1.0),
        ];
        for (sum, c) in rows {
            assert!((sum - c).abs() < 1e-14);
        }
        assert!((E1 + E3 + E4 + E5 + E6 + E7).abs() < 1e-15);
    }

    #[test]
    fn decoupled_limit_matches_logistic_solution() {
        let cfg = IntegratorConfig::default();
        for (p, c0) in [(2.0, 0.1), (1.1, 1e-3), (0.5, 0.8), (1.5, -0.3)] {
            let prm = params(p, CouplingMatrix::zeros(1));
            let mut st = NetworkState::new(vec![c0], vec![0.0]).unwrap();
            for _ in 0..20 {
                st = integrate_for(&st, &prm, &cfg, 1.0).unwrap();
                let want = logistic(c0, p - 1.0, st.t);
                assert!(
                    (st.c[0] - want).abs() <= 10.0 * cfg.rel_tol * want.abs() + cfg.abs_tol,
                    "p={p} t={} got {} want {want}",
                    st.t,
                    st.c[0]
                );
            }
        }
    }

    #[test]
    fn single_oscillator_settles_on_fixed_point() {
        let prm = params(2.0, CouplingMatrix::zeros(1));
        let x0 = NetworkState::new(vec![1e-5], vec![0.0]).unwrap();
        let out = integrate_to_steady_state(&x0, &prm, &IntegratorConfig::default()).unwrap();
        assert!(out.converged, "{out:?}");
        assert!((out.state.c[0] - 1.0).abs() < 1e-8);
        assert_eq!(out.state.s[0], 0.0);
    }

    #[test]
    fn below_threshold_pair_decays() {
        let prm = params(0.5, CouplingMatrix::pair(-0.1));
        let x0 = random_initial_state(2, 1e-5, &mut rng_from_seed(3)).unwrap();
        let out = integrate_to_steady_state(&x0, &prm, &IntegratorConfig::default()).unwrap();
        assert!(out.converged);
        assert!(out.state.max_amplitude() < 1e-8);
    }

    #[test]
    fn pair_above_threshold_reaches_closed_form_state() {
        let prm = params(2.0, CouplingMatrix::pair(-0.1));
        for seed in 0..10 {
            let x0 = random_initial_state(2, 1e-5, &mut rng_from_seed(seed)).unwrap();
            let out = integrate_to_steady_state(&x0, &prm, &IntegratorConfig::default()).unwrap();
            assert!(out.converged);
            let [c1, c2] = [out.state.c[0], out.state.c[1]];
            let amp2 = if c1 * c2 < 0.0 { 1.1 } else { 0.9 };
            assert!((c1 * c1 - amp2).abs() < 1e-7 && (c2 * c2 - amp2).abs() < 1e-7);
            assert!(out.state.s.iter().all(|s| s.abs() < 1e-9));
        }
    }

    #[test]
    fn max_time_reports_non_convergence() {
        let prm = params(1.1, CouplingMatrix::pair(-0.1));
        let x0 = random_initial_state(2, 1e-5, &mut rng_from_seed(1)).unwrap();
        let cfg = IntegratorConfig {
            max_time: 5.0,
            ..Default::default()
        };
        let out = integrate_to_steady_state(&x0, &prm, &cfg).unwrap();
        assert!(!out.converged);
        assert!((out.state.t - 5.0).abs() < 1e-12);
    }

    #[test]
    fn observer_sees_start_and_end() {
        let prm = params(2.0, CouplingMatrix::zeros(1));
        let x0 = NetworkState::new(vec![0.5], vec![0.0]).unwrap();
        let mut seen = Vec::new();
        let out = integrate_observed(&x0, &prm, &IntegratorConfig::default(), 3, |s| seen.push(s.t)).unwrap();
        assert_eq!(seen.first(), Some(&0.0));
        assert_eq!(seen.last(), Some(&out.state.t));
        assert!(seen.windows(2).all(|w| w[0] < w[1]));
    }
}
