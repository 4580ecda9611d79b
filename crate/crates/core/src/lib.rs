//! Non-equilibrium thermodynamics of open quantum systems.
//!
//! The library follows a small set of relevant observables of an open system
//! (oscillator amplitude and occupation, or the Bloch vector of a two-level
//! system), integrates their second-order time-local transport equations and
//! maps the averages back onto maximum-entropy Lagrange multipliers. From the
//! multipliers follow the non-equilibrium entropy and inverse temperature.
//!
//! Modules:
//!
//! - [`specfun`]: complex trigamma and the `arctanh(2X)/X` ratio.
//! - [`quad`]: adaptive Gauss-Kronrod quadrature for complex integrands.
//! - [`bath`]: Ohmic spectral density, bath correlators `f(t)`, `f(t, β)`,
//!   their Markovian limits and a tabulated cache for ODE right-hand sides.
//! - [`odeint`]: Dormand-Prince 5(4) integrator for complex state vectors.
//! - [`maxent`]: generic finite-dimensional relevant-distribution engine.
//! - [`oscillator`]: damped harmonic oscillator model.
//! - [`tls`]: damped, resonantly driven two-level system.
//!
//! Units: `ħ = 1`, times in units of `1/ω₀`.

// `!(x > y)` is used on purpose to reject NaN; reference constants are kept
// at their published precision.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod bath;
pub mod error;
pub mod maxent;
pub mod odeint;
pub mod oscillator;
pub mod quad;
pub mod specfun;
pub mod tls;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Entropy value with a flag for states on the boundary of the formalism's
/// domain, where the limit value is returned instead of the formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entropy {
    pub value: f64,
    pub degenerate: bool,
}

/// Relevant-variable samples along a trajectory, shared by both models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoSample<S> {
    pub t: f64,
    pub state: S,
    pub entropy: f64,
    pub beta: f64,
}

/// Integrator settings for model trajectories.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Maximum step in units of `1/ω₀`.
    pub max_step: f64,
}

impl Default for SimulationOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: 0.01,
        }
    }
}
