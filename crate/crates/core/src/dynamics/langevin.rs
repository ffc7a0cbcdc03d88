//! c-number Langevin equations of the DOPO network.
//!
//! With the pump adiabatically eliminated, each complex signal amplitude obeys
//!
//! ```text
//! dA_j/dτ = −(γ_s/2) A_j + κ (2F_p/√γ_p − (κ/γ_p) A_j²) A_j*
//!           + (γ_s/2) Σ_l ξ_jl A_l
//!           + (2κ/√γ_p) A_j* f_p,j + √γ_s f_s,j
//! ```
//!
//! where every real noise component is white with `⟨f(τ) f(τ')⟩ = δ(τ − τ')/4`.
//! Steps are Euler–Maruyama in the Itô sense: each real noise increment over `dτ`
//! is Gaussian with variance `dτ/4`, and the multiplicative pump-noise term uses
//! the amplitude at the start of the step.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{rhs_flat, NetworkState, READOUT_FLOOR};
use crate::error::{CimError, Result};
use crate::parallel::Exec;
use crate::seeding::{derive_seed, rng_from_seed};
use crate::spectral::CouplingMatrix;

/// Physical rates of a single oscillator and its external pump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Signal photon decay rate.
    pub gamma_s: f64,
    /// Pump photon decay rate.
    pub gamma_p: f64,
    /// Parametric gain.
    pub kappa: f64,
    /// External pump flux `F_p`.
    pub pump_flux: f64,
}

impl PhysicalParams {
    /// The pump is eliminated adiabatically, which needs `γ_p ≥ 10 γ_s`.
    pub fn new(gamma_s: f64, gamma_p: f64, kappa: f64, pump_flux: f64) -> Result<Self> {
        for (name, v) in [("gamma_s", gamma_s), ("gamma_p", gamma_p), ("kappa", kappa)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(CimError::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if !(pump_flux.is_finite() && pump_flux >= 0.0) {
            return Err(CimError::InvalidParameter(format!(
                "pump flux must be non-negative, got {pump_flux}"
            )));
        }
        if gamma_p < 10.0 * gamma_s {
            return Err(CimError::InvalidParameter(format!(
                "adiabatic pump elimination needs gamma_p >= 10 gamma_s (got {gamma_p} vs {gamma_s})"
            )));
        }
        Ok(Self {
            gamma_s,
            gamma_p,
            kappa,
            pump_flux,
        })
    }

    /// Parameters with the pump flux set to `p` times the threshold flux.
    pub fn with_normalized_pump(gamma_s: f64, gamma_p: f64, kappa: f64, p: f64) -> Result<Self> {
        let threshold = gamma_s * gamma_p.sqrt() / (4.0 * kappa);
        Self::new(gamma_s, gamma_p, kappa, p * threshold)
    }

    /// `F_th = γ_s √γ_p / (4κ)`.
    pub fn threshold_flux(&self) -> f64 {
        self.gamma_s * self.gamma_p.sqrt() / (4.0 * self.kappa)
    }

    /// `A_s = √(γ_s γ_p / (2κ²))`, the single-oscillator amplitude at `p = 2`.
    pub fn amplitude_scale(&self) -> f64 {
        (self.gamma_s * self.gamma_p / (2.0 * self.kappa * self.kappa)).sqrt()
    }

    /// `p = F_p / F_th`.
    pub fn normalized_pump(&self) -> f64 {
        self.pump_flux / self.threshold_flux()
    }

    /// Largest Euler–Maruyama step accepted: `0.1/γ_p`.
    pub fn max_step(&self) -> f64 {
        0.1 / self.gamma_p
    }

    /// `10⁻³/γ_s`, capped by [`max_step`](Self::max_step).
    pub fn default_step(&self) -> f64 {
        (1e-3 / self.gamma_s).min(self.max_step())
    }

    /// Converts complex amplitudes to the normalized state at normalized time
    /// `t = γ_s τ / 2`.
    pub fn normalize(&self, amplitudes: &[Complex64], tau: f64) -> NetworkState {
        let scale = self.amplitude_scale();
        NetworkState {
            c: amplitudes.iter().map(|a| a.re / scale).collect(),
            s: amplitudes.iter().map(|a| a.im / scale).collect(),
            t: self.gamma_s * tau / 2.0,
        }
    }
}

fn check_size(coupling: &CouplingMatrix, got: usize) -> Result<()> {
    if coupling.size() != got {
        return Err(CimError::SizeMismatch {
            expected: coupling.size(),
            got,
        });
    }
    Ok(())
}

fn drift_into(amps: &[Complex64], params: &PhysicalParams, coupling: &CouplingMatrix, out: &mut [Complex64]) {
    let gain = 2.0 * params.kappa * params.pump_flux / params.gamma_p.sqrt();
    let sat = params.kappa * params.kappa / params.gamma_p;
    let half_gs = 0.5 * params.gamma_s;
    for (j, (o, &a)) in out.iter_mut().zip(amps).enumerate() {
        let injected: Complex64 = coupling.row(j).iter().map(|&(l, xi)| amps[l] * xi).sum();
        *o = -half_gs * a + (gain - sat * a * a) * a.conj() + half_gs * injected;
    }
}

/// Deterministic part of the network Langevin equations.
pub fn langevin_drift(
    amplitudes: &[Complex64],
    params: &PhysicalParams,
    coupling: &CouplingMatrix,
) -> Result<Vec<Complex64>> {
    check_size(coupling, amplitudes.len())?;
    let mut out = vec![Complex64::new(0.0, 0.0); amplitudes.len()];
    drift_into(amplitudes, params, coupling, &mut out);
    Ok(out)
}

/// Full right-hand side for given instantaneous noise values `f_s`, `f_p`.
pub fn rhs_langevin_network(
    amplitudes: &[Complex64],
    params: &PhysicalParams,
    coupling: &CouplingMatrix,
    f_s: &[Complex64],
    f_p: &[Complex64],
) -> Result<Vec<Complex64>> {
    check_size(coupling, f_s.len())?;
    check_size(coupling, f_p.len())?;
    let mut out = langevin_drift(amplitudes, params, coupling)?;
    let pump_noise = 2.0 * params.kappa / params.gamma_p.sqrt();
    let signal_noise = params.gamma_s.sqrt();
    for (j, o) in out.iter_mut().enumerate() {
        *o += pump_noise * amplitudes[j].conj() * f_p[j] + signal_noise * f_s[j];
    }
    Ok(out)
}

/// Euler–Maruyama integrator holding its scratch buffers.
struct EulerMaruyama<'a> {
    params: &'a PhysicalParams,
    coupling: &'a CouplingMatrix,
    dtau: f64,
    noise_scale: f64,
    pump_noise: f64,
    signal_noise: f64,
    drift: Vec<Complex64>,
}

impl<'a> EulerMaruyama<'a> {
    fn new(params: &'a PhysicalParams, coupling: &'a CouplingMatrix, dtau: f64) -> Result<Self> {
        if !(dtau.is_finite() && dtau > 0.0) {
            return Err(CimError::InvalidParameter(format!("step must be positive, got {dtau}")));
        }
        if dtau > params.max_step() * (1.0 + 1e-12) {
            return Err(CimError::StepTooLarge {
                dt: dtau,
                limit: params.max_step(),
            });
        }
        Ok(Self {
            params,
            coupling,
            dtau,
            // each real increment has variance dτ/4
            noise_scale: 0.5 * dtau.sqrt(),
            pump_noise: 2.0 * params.kappa / params.gamma_p.sqrt(),
            signal_noise: params.gamma_s.sqrt(),
            drift: vec![Complex64::new(0.0, 0.0); coupling.size()],
        })
    }

    fn step<R: Rng + ?Sized>(&mut self, amps: &mut [Complex64], rng: &mut R) {
        drift_into(amps, self.params, self.coupling, &mut self.drift);
        for (a, d) in amps.iter_mut().zip(&self.drift) {
            let zs: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
            let dw_s = Complex64::new(zs[0], zs[1]) * self.noise_scale;
            let dw_p = Complex64::new(zs[2], zs[3]) * self.noise_scale;
            *a += d * self.dtau + self.pump_noise * a.conj() * dw_p + self.signal_noise * dw_s;
        }
    }
}

/// Sampled path of the complex amplitudes.
#[derive(Debug, Clone, Serialize)]
pub struct LangevinTrajectory {
    pub tau: Vec<f64>,
    pub amplitudes: Vec<Vec<Complex64>>,
}

/// Runs `steps` Euler–Maruyama steps from `x0`, recording every `stride`-th state
/// (and the initial one).
pub fn simulate_langevin<R: Rng + ?Sized>(
    x0: &[Complex64],
    params: &PhysicalParams,
    coupling: &CouplingMatrix,
    dtau: f64,
    steps: u64,
    stride: u64,
    rng: &mut R,
) -> Result<LangevinTrajectory> {
    check_size(coupling, x0.len())?;
    let mut em = EulerMaruyama::new(params, coupling, dtau)?;
    let stride = stride.max(1);
    let mut amps = x0.to_vec();
    let mut out = LangevinTrajectory {
        tau: vec![0.0],
        amplitudes: vec![amps.clone()],
    };
    for k in 1..=steps {
        em.step(&mut amps, rng);
        if k % stride == 0 {
            out.tau.push(k as f64 * dtau);
            out.amplitudes.push(amps.clone());
        }
    }
    Ok(out)
}

/// Stopping rule for a Langevin run started from the vacuum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LangevinConfig {
    /// Step `dτ`; `None` uses [`PhysicalParams::default_step`].
    pub dtau: Option<f64>,
    /// Give up after this much normalized time.
    pub max_time: f64,
    /// Normalized time between settling checks.
    pub check_interval: f64,
    /// Settled when `max|drift| ≤ rel_drift_tol · max|x|` in normalized units...
    pub rel_drift_tol: f64,
    /// ...for this much normalized time.
    pub hold_time: f64,
}

impl Default for LangevinConfig {
    fn default() -> Self {
        Self {
            dtau: None,
            max_time: 2000.0,
            check_interval: 0.5,
            rel_drift_tol: 1e-3,
            hold_time: 5.0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LangevinOutcome {
    /// Final state in normalized units.
    pub state: NetworkState,
    pub converged: bool,
    pub steps: u64,
}

/// Integrates from the vacuum until the normalized deterministic drift is small
/// relative to the amplitudes and stays so for `cfg.hold_time`.
pub fn langevin_to_steady_state<R: Rng + ?Sized>(
    params: &PhysicalParams,
    coupling: &CouplingMatrix,
    cfg: &LangevinConfig,
    rng: &mut R,
) -> Result<LangevinOutcome> {
    let dtau = cfg.dtau.unwrap_or_else(|| params.default_step());
    let mut em = EulerMaruyama::new(params, coupling, dtau)?;
    let n = coupling.size();
    let p = params.normalized_pump();
    let tau_per_t = 2.0 / params.gamma_s;
    let check_every = ((cfg.check_interval * tau_per_t / dtau).round() as u64).max(1);
    let max_steps = (cfg.max_time * tau_per_t / dtau).ceil() as u64;

    let mut amps = vec![Complex64::new(0.0, 0.0); n];
    let mut flat = vec![0.0; 2 * n];
    let mut dflat = vec![0.0; 2 * n];
    let mut settled_since: Option<u64> = None;
    let hold_steps = (cfg.hold_time * tau_per_t / dtau).round() as u64;
    let mut steps = 0u64;
    while steps < max_steps {
        em.step(&mut amps, rng);
        steps += 1;
        if !steps.is_multiple_of(check_every) {
            continue;
        }
        let st = params.normalize(&amps, steps as f64 * dtau);
        flat[..n].copy_from_slice(&st.c);
        flat[n..].copy_from_slice(&st.s);
        rhs_flat(p, coupling, &flat, &mut dflat);
        let size = flat.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let drift = dflat.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let min_c = st.c.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
        if drift <= cfg.rel_drift_tol * size && min_c > READOUT_FLOOR {
            let since = *settled_since.get_or_insert(steps);
            if steps - since >= hold_steps {
                return Ok(LangevinOutcome {
                    state: st,
                    converged: true,
                    steps,
                });
            }
        } else {
            settled_since = None;
        }
    }
    Ok(LangevinOutcome {
        state: params.normalize(&amps, steps as f64 * dtau),
        converged: false,
        steps,
    })
}

/// Sampling plan for stationary moments of a single oscillator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceConfig {
    pub n_paths: usize,
    /// Time `τ` discarded before sampling.
    pub burn_in: f64,
    /// Time `τ` over which samples are taken after the burn-in.
    pub window: f64,
    /// Time `τ` between samples of one path.
    pub sample_interval: f64,
    pub dtau: Option<f64>,
}

impl Default for VarianceConfig {
    fn default() -> Self {
        Self {
            n_paths: 1000,
            burn_in: 200.0,
            window: 100.0,
            sample_interval: 1.0,
            dtau: None,
        }
    }
}

/// Stationary second central moments of the in-phase and quadrature components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarianceEstimate {
    pub var_inphase: f64,
    pub var_quadrature: f64,
    pub mean_inphase: f64,
    pub mean_quadrature: f64,
    pub n_samples: u64,
}

#[derive(Default, Clone, Copy)]
struct Moments {
    n: u64,
    sum_re: f64,
    sum_im: f64,
    sq_re: f64,
    sq_im: f64,
}

/// Ensemble moments of `Re A`, `Im A` for one oscillator started from the vacuum,
/// pooled over all paths and all sample times after the burn-in.
pub fn stationary_variances(
    params: &PhysicalParams,
    cfg: &VarianceConfig,
    master_seed: u64,
    exec: Exec,
) -> Result<VarianceEstimate> {
    if cfg.n_paths < 100 {
        return Err(CimError::InvalidParameter(format!(
            "at least 100 paths are needed, got {}",
            cfg.n_paths
        )));
    }
    for (name, v) in [
        ("burn_in", cfg.burn_in),
        ("window", cfg.window),
        ("sample_interval", cfg.sample_interval),
    ] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(CimError::InvalidParameter(format!("{name} must be non-negative")));
        }
    }
    let coupling = CouplingMatrix::zeros(1);
    let dtau = cfg.dtau.unwrap_or_else(|| params.default_step());
    // validates the step before spawning work
    EulerMaruyama::new(params, &coupling, dtau)?;
    let burn_steps = (cfg.burn_in / dtau).round() as u64;
    let every = ((cfg.sample_interval / dtau).round() as u64).max(1);
    let samples = (cfg.window / (every as f64 * dtau)).floor() as u64 + 1;

    let per_path = exec.map(cfg.n_paths, |path| {
        let mut rng = rng_from_seed(derive_seed(master_seed, b"variance", path as u64));
        let mut em = EulerMaruyama::new(params, &coupling, dtau).expect("step validated");
        let mut a = [Complex64::new(0.0, 0.0)];
        for _ in 0..burn_steps {
            em.step(&mut a, &mut rng);
        }
        let mut m = Moments::default();
        for k in 0..samples {
            if k > 0 {
                for _ in 0..every {
                    em.step(&mut a, &mut rng);
                }
            }
            m.n += 1;
            m.sum_re += a[0].re;
            m.sum_im += a[0].im;
            m.sq_re += a[0].re * a[0].re;
            m.sq_im += a[0].im * a[0].im;
        }
        m
    });
    let total = per_path.into_iter().fold(Moments::default(), |acc, m| Moments {
        n: acc.n + m.n,
        sum_re: acc.sum_re + m.sum_re,
        sum_im: acc.sum_im + m.sum_im,
        sq_re: acc.sq_re + m.sq_re,
        sq_im: acc.sq_im + m.sq_im,
    });
    let n = total.n as f64;
    let mean_re = total.sum_re / n;
    let mean_im = total.sum_im / n;
    Ok(VarianceEstimate {
        var_inphase: total.sq_re / n - mean_re * mean_re,
        var_quadrature: total.sq_im / n - mean_im * mean_im,
        mean_inphase: mean_re,
        mean_quadrature: mean_im,
        n_samples: total.n,
    })
}

/// Stationary variances of the linearized single-oscillator equations:
/// `1/(4(1 − p))` in phase and `1/(4(1 + p))` in quadrature, for `p < 1`.
pub fn linearized_variances(p: f64) -> (f64, f64) {
    (0.25 / (1.0 - p), 0.25 / (1.0 + p))
}
