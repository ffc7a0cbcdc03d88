//! Simulation of coherent Ising machines built from networks of degenerate
//! optical parametric oscillators (DOPOs).
//!
//! An Ising or MAX-CUT instance ([`model`]) is mapped onto mutual-injection
//! couplings between oscillators ([`spectral`]). The network is integrated either
//! with the normalized deterministic equations or the c-number Langevin equations
//! ([`dynamics`]), and the in-phase signs of the steady state are read out as spins.
//! [`harness`] turns this into Monte Carlo success-probability estimates over
//! instances enumerated by [`graphs`]; [`analysis`] holds the two-oscillator phase
//! diagram and the photon-decay-rate mapping.

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod graphs;
pub mod harness;
pub mod linalg;
pub mod model;
pub mod parallel;
pub mod seeding;
pub mod spectral;

pub use error::{CimError, Graph6Error, Result};
pub use parallel::Exec;
