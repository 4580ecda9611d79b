//! Damped two-level system driven at resonance.
//!
//! With `σ_z = diag(½, -½)` and `σ₊` the raising operator, the transport
//! equations in the frame rotating with the drive read
//!
//! ```text
//! d⟨σ_z⟩/dt = 2Ω Im⟨σ₊⟩ - 2 Re f(t, β) ⟨σ_z⟩ - Re f(t)
//! d⟨σ₊⟩/dt  = -2iΩ⟨σ_z⟩ - f(t, β)⟨σ₊⟩
//! ```

use num_complex::Complex64;

use crate::bath::{BathParams, Coefficients};
use crate::error::{Error, Result};
use crate::maxent::{operators, MultiplierVector, RelevantOperatorSet};
use crate::odeint::{self, OdeProblem};
use crate::specfun;
use crate::{Entropy, SimulationOptions, ThermoSample};

/// Distance from the Bloch-sphere surface below which a state counts as pure.
pub const BOUNDARY_MARGIN: f64 = 1e-12;
/// Overshoot of `X` past 1/2 tolerated by the trajectory monitor.
pub const BLOCH_SLACK: f64 = 1e-9;
/// Drive strength, relative to `ω₀`, above which the weak-drive assumption
/// behind the transport equations is questionable.
pub const STRONG_DRIVE_RATIO: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TlsState {
    /// `⟨σ_z⟩`
    pub mean_sz: f64,
    /// `⟨σ₊⟩`; `⟨σ₋⟩` is its conjugate.
    pub mean_sp: Complex64,
}

impl TlsState {
    pub fn new(mean_sz: f64, mean_sp: Complex64) -> Self {
        Self { mean_sz, mean_sp }
    }

    /// Bloch-vector length `X = √(|⟨σ₊⟩|² + ⟨σ_z⟩²)`.
    pub fn bloch_length(&self) -> f64 {
        self.mean_sp.norm().hypot(self.mean_sz)
    }

    fn to_vec(self) -> Vec<Complex64> {
        vec![Complex64::new(self.mean_sz, 0.0), self.mean_sp]
    }

    fn from_slice(y: &[Complex64]) -> Self {
        Self::new(y[0].re, y[1])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TlsParams {
    pub omega0: f64,
    /// Drive frequency `ω_L`.
    pub omega_l: f64,
    /// Rabi frequency `Ω`, real.
    pub rabi: f64,
    pub bath: BathParams,
}

impl TlsParams {
    /// Resonant drive, `ω_L = ω₀ = bath.omega0`.
    pub fn resonant(rabi: f64, bath: BathParams) -> Result<Self> {
        let p = Self {
            omega0: bath.omega0,
            omega_l: bath.omega0,
            rabi,
            bath,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        self.bath.validate()?;
        if !(self.rabi.is_finite() && self.rabi >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "Rabi frequency must be finite and non-negative, got {}",
                self.rabi
            )));
        }
        if !(self.omega_l.is_finite() && self.omega_l > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "drive frequency must be positive, got {}",
                self.omega_l
            )));
        }
        if self.omega0 != self.bath.omega0 {
            return Err(Error::InvalidParameter(format!(
                "level splitting {} differs from the bath's omega0 {}",
                self.omega0, self.bath.omega0
            )));
        }
        Ok(())
    }

    pub fn is_resonant(&self) -> bool {
        (self.omega_l - self.omega0).abs() <= 1e-12 * self.omega0
    }

    /// Human-readable warnings for parameters outside the model's validity
    /// range. Empty when none apply.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.rabi > STRONG_DRIVE_RATIO * self.omega0 {
            w.push(format!(
                "Rabi frequency {} exceeds {} omega0: transport equations assume a weak drive",
                self.rabi, STRONG_DRIVE_RATIO
            ));
        }
        w
    }
}

/// Multipliers of `σ₊`, `σ_z`, `σ₋` and the ratio `R = arctanh(2X)/X`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TlsMultipliers {
    pub f1: Complex64,
    pub f2: f64,
    pub f3: Complex64,
    pub r: f64,
}

impl TlsMultipliers {
    pub fn to_vector(self, ops: &RelevantOperatorSet) -> Result<MultiplierVector> {
        MultiplierVector::new(vec![self.f1, Complex64::new(self.f2, 0.0), self.f3], ops)
    }

    /// Partition function `2 cosh(√(4F₁F₃ + F₂²)/2)`.
    pub fn partition_function(&self) -> f64 {
        let arg = (4.0 * (self.f1 * self.f3).re + self.f2 * self.f2).sqrt();
        2.0 * (0.5 * arg).cosh()
    }
}

/// Time derivative of `(⟨σ_z⟩, ⟨σ₊⟩)`. Assumes a resonant drive.
pub fn rhs(t: f64, state: &TlsState, rabi: f64, coeffs: &Coefficients) -> TlsState {
    let f = coeffs.f(t);
    let fb = coeffs.f_beta(t);
    TlsState {
        mean_sz: 2.0 * rabi * state.mean_sp.im - 2.0 * fb.re * state.mean_sz - f.re,
        mean_sp: Complex64::new(0.0, -2.0 * rabi * state.mean_sz) - fb * state.mean_sp,
    }
}

fn check_interior(state: &TlsState) -> Result<f64> {
    let x = state.bloch_length();
    if !x.is_finite() || x >= 0.5 - BOUNDARY_MARGIN {
        return Err(Error::Domain {
            value: x,
            reason: "Bloch vector on or outside the sphere: the state is pure or unphysical",
        });
    }
    Ok(x)
}

/// `F₁ = -⟨σ₋⟩R`, `F₂ = -2⟨σ_z⟩R`, `F₃ = F₁*`.
pub fn multipliers(state: &TlsState) -> Result<TlsMultipliers> {
    let x = check_interior(state)?;
    let r = specfun::arctanh_ratio(x)?;
    let f1 = -state.mean_sp.conj() * r;
    Ok(TlsMultipliers {
        f1,
        // + 0.0 keeps a zero ⟨σ_z⟩ from printing as -0
        f2: -2.0 * state.mean_sz * r + 0.0,
        f3: f1.conj(),
        r,
    })
}

/// `S = -2X²R + ln 2 - ½ ln(1 - 4X²)`; returns 0 flagged for pure states.
pub fn entropy(state: &TlsState) -> Result<Entropy> {
    let x = state.bloch_length();
    if !x.is_finite() || x > 0.5 + BLOCH_SLACK {
        return Err(Error::Domain {
            value: x,
            reason: "Bloch vector outside the sphere",
        });
    }
    if x >= 0.5 - BOUNDARY_MARGIN {
        return Ok(Entropy {
            value: 0.0,
            degenerate: true,
        });
    }
    let r = specfun::arctanh_ratio(x)?;
    let x2 = x * x;
    Ok(Entropy {
        value: -2.0 * x2 * r + std::f64::consts::LN_2 - 0.5 * (-4.0 * x2).ln_1p(),
        degenerate: false,
    })
}

/// `β(t) = F₂/ω₀`; negative under population inversion.
pub fn inverse_temperature(state: &TlsState, omega0: f64) -> Result<f64> {
    Ok(multipliers(state)?.f2 / omega0)
}

/// Coefficients of the driven two-level evolution operator from `t'` to `t`,
/// `U = [[c, d], [-d*, c*]]`, together with `k = √(Ω² + (ω_L - ω₀)²)`.
pub fn evolution_coeffs(t: f64, t_prime: f64, params: &TlsParams) -> (Complex64, Complex64, f64) {
    let tau = t - t_prime;
    let detuning = params.omega_l - params.omega0;
    let k = params.rabi.hypot(detuning);
    let half = 0.5 * k * tau;
    // sin(kτ/2)/k, finite as k → 0
    let sin_over_k = if half.abs() < 1e-8 {
        0.5 * tau * (1.0 - half * half / 6.0)
    } else {
        half.sin() / k
    };
    let carrier = Complex64::from_polar(1.0, -0.5 * tau * params.omega_l);
    let c = carrier * Complex64::new(half.cos(), detuning * sin_over_k);
    let d = Complex64::from_polar(1.0, 0.5 * (t + t_prime) * params.omega_l)
        * Complex64::new(0.0, -params.rabi * sin_over_k);
    (c, d, k)
}

/// `{σ₊, σ_z, σ₋}` as 2×2 matrices, `σ₊` paired with `σ₋`.
pub fn relevant_operators() -> Result<RelevantOperatorSet> {
    RelevantOperatorSet::new(operators::spin_half().to_vec(), &[(0, 2)])
}

/// Integrates the transport equations at resonance and returns the states
/// at `times`.
pub fn trajectory(
    initial: &TlsState,
    params: &TlsParams,
    coeffs: &Coefficients,
    times: &[f64],
    opts: &SimulationOptions,
) -> Result<Vec<TlsState>> {
    params.validate()?;
    if !params.is_resonant() {
        return Err(Error::InvalidParameter(format!(
            "transport equations require resonance, got omega_L = {} and omega0 = {}",
            params.omega_l, params.omega0
        )));
    }
    if initial.bloch_length() > 0.5 {
        return Err(Error::Domain {
            value: initial.bloch_length(),
            reason: "initial Bloch vector outside the sphere",
        });
    }
    let Some(&t_end) = times.last() else {
        return Ok(Vec::new());
    };
    if t_end <= 0.0 {
        return Ok(times.iter().map(|_| *initial).collect());
    }
    let rabi = params.rabi;
    let problem = OdeProblem::new(
        |t, y: &[Complex64], dy: &mut [Complex64]| {
            let d = rhs(t, &TlsState::from_slice(y), rabi, coeffs);
            dy[0] = Complex64::new(d.mean_sz, 0.0);
            dy[1] = d.mean_sp;
        },
        0.0,
        t_end,
        initial.to_vec(),
    )
    .tolerances(opts.rel_tol, opts.abs_tol)
    .max_step(opts.max_step / params.omega0);
    let traj = odeint::integrate(&problem, times)?;
    let states: Vec<TlsState> = traj.states.iter().map(|y| TlsState::from_slice(y)).collect();
    for (state, &t) in states.iter().zip(times) {
        let x = state.bloch_length();
        if !(x <= 0.5 + BLOCH_SLACK) {
            return Err(Error::InvariantViolation {
                t,
                detail: format!("Bloch vector length {x} left the sphere"),
            });
        }
    }
    Ok(states)
}

/// Trajectory plus entropy and inverse temperature at every sample.
pub fn simulate(
    initial: &TlsState,
    params: &TlsParams,
    coeffs: &Coefficients,
    times: &[f64],
    opts: &SimulationOptions,
) -> Result<Vec<ThermoSample<TlsState>>> {
    trajectory(initial, params, coeffs, times, opts)?
        .into_iter()
        .zip(times)
        .map(|(state, &t)| {
            Ok(ThermoSample {
                t,
                state,
                entropy: entropy(&state)?.value,
                beta: inverse_temperature(&state, params.omega0)?,
            })
        })
        .collect()
}
