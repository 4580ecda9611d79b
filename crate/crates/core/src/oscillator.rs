//! Damped harmonic oscillator with relevant variables `a`, `a†` and `a†a`.
//!
//! Transport equations to second order in the coupling:
//!
//! ```text
//! d⟨a⟩/dt   = -⟨a⟩ f*(t)
//! d⟨a†a⟩/dt = -2 Re f(t) ⟨a†a⟩ + Re[f(t, β) - f(t)]
//! ```
//!
//! The relevant distribution is a displaced thermal state, so entropy and
//! temperature depend only on `n_eff = ⟨a†a⟩ - |⟨a⟩|²`.

use num_complex::Complex64;

use crate::bath::Coefficients;
use crate::error::{Error, Result};
use crate::maxent::{self, operators, MultiplierVector, RelevantOperatorSet, RelevantState};
use crate::odeint::{self, OdeProblem};
use crate::quad::{self, QuadOptions};
use crate::{Entropy, SimulationOptions, ThermoSample};

/// `n_eff` at or below which the state counts as pure (coherent).
pub const DEGENERATE_NEFF: f64 = 1e-14;

pub const DEFAULT_FOCK_LEVELS: usize = 256;
const TAIL_LEVELS: usize = 10;
const TAIL_TOLERANCE: f64 = 1e-10;
const MAX_FOCK_LEVELS: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorState {
    /// `⟨a⟩`
    pub mean_a: Complex64,
    /// `⟨a†a⟩`
    pub mean_n: f64,
}

impl OscillatorState {
    pub fn new(mean_a: Complex64, mean_n: f64) -> Self {
        Self { mean_a, mean_n }
    }

    pub fn n_eff(&self) -> f64 {
        self.mean_n - self.mean_a.norm_sqr()
    }

    fn to_vec(self) -> Vec<Complex64> {
        vec![self.mean_a, Complex64::new(self.mean_n, 0.0)]
    }

    fn from_slice(y: &[Complex64]) -> Self {
        Self::new(y[0], y[1].re)
    }
}

/// Multipliers of `a†`, `a†a` and `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorMultipliers {
    pub f1: Complex64,
    pub f2: f64,
    pub f3: Complex64,
}

impl OscillatorMultipliers {
    pub fn to_vector(self, ops: &RelevantOperatorSet) -> Result<MultiplierVector> {
        MultiplierVector::new(vec![self.f1, Complex64::new(self.f2, 0.0), self.f3], ops)
    }
}

/// Time derivative of `(⟨a⟩, ⟨a†a⟩)`.
pub fn rhs(t: f64, state: &OscillatorState, coeffs: &Coefficients) -> OscillatorState {
    let f = coeffs.f(t);
    let fb = coeffs.f_beta(t);
    OscillatorState {
        mean_a: -state.mean_a * f.conj(),
        mean_n: -2.0 * f.re * state.mean_n + (fb.re - f.re),
    }
}

/// Exponential-integral solution of the transport equations:
///
/// ```text
/// ⟨a⟩ᵗ   = ⟨a⟩⁰ exp(-∫₀ᵗ f*)
/// ⟨a†a⟩ᵗ = ⟨a†a⟩⁰ e^{-Γ(t)} + ∫₀ᵗ e^{-(Γ(t) - Γ(s))} Re[f(s, β) - f(s)] ds,  Γ(t) = ∫₀ᵗ (f + f*)
/// ```
pub fn closed_form(t: f64, initial: &OscillatorState, coeffs: &Coefficients) -> Result<OscillatorState> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::Domain {
            value: t,
            reason: "closed-form time must be finite and non-negative",
        });
    }
    if t == 0.0 {
        return Ok(*initial);
    }
    let damping = |s: f64| 2.0 * coeffs.int_f(s).re;
    let gamma_t = damping(t);
    let mean_a = initial.mean_a * (-coeffs.int_f(t).conj()).exp();

    let params = coeffs.params();
    let scale = (1.0 / params.cutoff).min(1.0 / params.omega0).min(1.0);
    let opts = QuadOptions {
        abs_tol: 1e-13,
        rel_tol: 1e-12,
        ..QuadOptions::default()
    }
    .with_pieces(((t / scale).ceil() as usize).max(1));
    let (source, _) = quad::integrate_real(
        |s| (damping(s) - gamma_t).exp() * (coeffs.f_beta(s).re - coeffs.f(s).re),
        0.0,
        t,
        opts,
    )?;
    Ok(OscillatorState {
        mean_a,
        mean_n: initial.mean_n * (-gamma_t).exp() + source,
    })
}

/// Solves the self-consistency conditions in closed form:
/// `F₂ = ln((n_eff + 1)/n_eff)`, `F₁ = -F₂⟨a⟩`, `F₃ = -F₂⟨a†⟩`.
pub fn multipliers(state: &OscillatorState) -> Result<OscillatorMultipliers> {
    let n_eff = state.n_eff();
    if !(n_eff > DEGENERATE_NEFF) {
        return Err(Error::Degenerate(format!(
            "n_eff = {n_eff:e}: multipliers diverge for a coherent or unphysical state"
        )));
    }
    let f2 = (1.0 / n_eff).ln_1p();
    Ok(OscillatorMultipliers {
        f1: -state.mean_a * f2,
        f2,
        f3: -state.mean_a.conj() * f2,
    })
}

/// `S = (1 + n_eff) ln(1 + n_eff) - n_eff ln n_eff`; the bath offset is zero.
pub fn entropy(state: &OscillatorState) -> Entropy {
    let n = state.n_eff();
    if !(n > DEGENERATE_NEFF) {
        return Entropy {
            value: 0.0,
            degenerate: true,
        };
    }
    Entropy {
        value: (1.0 + n) * n.ln_1p() - n * n.ln(),
        degenerate: false,
    }
}

/// `β(t) = F₂/ω₀`.
pub fn inverse_temperature(state: &OscillatorState, omega0: f64) -> Result<f64> {
    Ok(multipliers(state)?.f2 / omega0)
}

/// `⟨a†a a†a⟩ = 2⟨n⟩² + ⟨n⟩ - |⟨a⟩|⁴` in the relevant distribution.
pub fn quartic_correlator(state: &OscillatorState) -> f64 {
    let n = state.mean_n;
    let a2 = state.mean_a.norm_sqr();
    2.0 * n * n + n - a2 * a2
}

/// `{a†, a†a, a}` truncated to `levels` Fock states, `a†` paired with `a`.
pub fn relevant_operators(levels: usize) -> Result<RelevantOperatorSet> {
    let a = operators::annihilation(levels);
    let ad = a.adjoint();
    let n = &ad * &a;
    RelevantOperatorSet::new(vec![ad, n, a], &[(0, 2)])
}

/// Relevant distribution in a `levels`-state Fock truncation, rejected when
/// the top levels carry non-negligible probability.
pub fn fock_relevant_state(
    state: &OscillatorState,
    levels: usize,
) -> Result<(RelevantOperatorSet, RelevantState)> {
    let ops = relevant_operators(levels)?;
    let f = multipliers(state)?.to_vector(&ops)?;
    let rel = maxent::build_state(&f, &ops)?;
    let tail = maxent::tail_mass(&rel.rho, TAIL_LEVELS);
    if tail >= TAIL_TOLERANCE {
        return Err(Error::Truncation { levels, tail });
    }
    Ok((ops, rel))
}

/// Like [`fock_relevant_state`], starting from [`DEFAULT_FOCK_LEVELS`] and
/// adding 128 levels until the tail check passes.
pub fn fock_relevant_state_adaptive(state: &OscillatorState) -> Result<(RelevantOperatorSet, RelevantState)> {
    let mut levels = DEFAULT_FOCK_LEVELS;
    loop {
        match fock_relevant_state(state, levels) {
            Err(Error::Truncation { .. }) if levels < MAX_FOCK_LEVELS => levels += 128,
            other => return other,
        }
    }
}

/// Integrates the transport equations and returns the states at `times`
/// (ascending, starting at or after 0).
pub fn trajectory(
    initial: &OscillatorState,
    coeffs: &Coefficients,
    times: &[f64],
    opts: &SimulationOptions,
) -> Result<Vec<OscillatorState>> {
    let Some(&t_end) = times.last() else {
        return Ok(Vec::new());
    };
    if t_end <= 0.0 {
        return Ok(times.iter().map(|_| *initial).collect());
    }
    let omega0 = coeffs.params().omega0;
    let problem = OdeProblem::new(
        |t, y: &[Complex64], dy: &mut [Complex64]| {
            let d = rhs(t, &OscillatorState::from_slice(y), coeffs);
            dy[0] = d.mean_a;
            dy[1] = Complex64::new(d.mean_n, 0.0);
        },
        0.0,
        t_end,
        initial.to_vec(),
    )
    .tolerances(opts.rel_tol, opts.abs_tol)
    .max_step(opts.max_step / omega0);
    let traj = odeint::integrate(&problem, times)?;
    Ok(traj.states.iter().map(|y| OscillatorState::from_slice(y)).collect())
}

/// Trajectory plus entropy and inverse temperature at every sample; aborts
/// when `n_eff` leaves the physical domain.
pub fn simulate(
    initial: &OscillatorState,
    coeffs: &Coefficients,
    times: &[f64],
    opts: &SimulationOptions,
) -> Result<Vec<ThermoSample<OscillatorState>>> {
    let omega0 = coeffs.params().omega0;
    trajectory(initial, coeffs, times, opts)?
        .into_iter()
        .zip(times)
        .map(|(state, &t)| {
            if !(state.n_eff() > 0.0) || state.mean_n < 0.0 {
                return Err(Error::InvariantViolation {
                    t,
                    detail: format!(
                        "n_eff = {:e}, <n> = {:e}; the relevant distribution no longer exists",
                        state.n_eff(),
                        state.mean_n
                    ),
                });
            }
            Ok(ThermoSample {
                t,
                state,
                entropy: entropy(&state).value,
                beta: inverse_temperature(&state, omega0)?,
            })
        })
        .collect()
}
