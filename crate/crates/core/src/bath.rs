//! Bath spectral density and the time-dependent correlation functions
//!
//! ```text
//! f(t, β) = ∫₀ᵗ dt' ∫₀^∞ dω J(ω) coth(βω/2) e^{i(ω-ω₀)t'}
//! f(t)    = f(t, ∞)
//! ```
//!
//! For `J(ω) = ω e^{-ω/W}` the frequency integral has a closed form, so only
//! the smooth `t'` integral is done numerically:
//!
//! ```text
//! ∫ J e^{i(ω-ω₀)t} dω        = e^{-iω₀t} / (1/W - it)²
//! ∫ J coth e^{i(ω-ω₀)t} dω   = e^{-iω₀t} (W²/(tW + i)² + 2ψ'((1 - itW)/(Wβ)) / β²)
//! ```

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{self, QuadOptions};
use crate::specfun::trigamma;

/// Spectral-density family. Only the exponentially cut-off Ohmic model is
/// implemented.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralModel {
    #[default]
    OhmicExponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathParams {
    /// Cutoff frequency `W`.
    pub cutoff: f64,
    /// Bath inverse temperature.
    pub beta: f64,
    /// System transition frequency `ω₀`.
    pub omega0: f64,
    #[serde(default)]
    pub model: SpectralModel,
}

impl BathParams {
    pub fn new(cutoff: f64, beta: f64, omega0: f64) -> Result<Self> {
        let p = Self {
            cutoff,
            beta,
            omega0,
            model: SpectralModel::OhmicExponential,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("W", self.cutoff), ("beta", self.beta), ("omega0", self.omega0)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Bose-Einstein occupation `1/(e^{βω₀} - 1)` of the system mode.
    pub fn bose_einstein(&self) -> f64 {
        1.0 / (self.beta * self.omega0).exp_m1()
    }
}

/// Which coefficients drive the transport equations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Markovian,
    NonMarkovian,
}

/// `J(ω) = ω e^{-ω/W}`.
pub fn spectral_density(omega: f64, params: &BathParams) -> f64 {
    match params.model {
        SpectralModel::OhmicExponential => omega * (-omega / params.cutoff).exp(),
    }
}

/// Time derivative of `f(t)`: `e^{-iω₀t} / (1/W - it)²`.
pub fn kernel(t: f64, params: &BathParams) -> Complex64 {
    let phase = Complex64::from_polar(1.0, -params.omega0 * t);
    let denom = Complex64::new(1.0 / params.cutoff, -t);
    phase / (denom * denom)
}

/// Time derivative of `f(t, β)`.
pub fn kernel_thermal(t: f64, params: &BathParams) -> Complex64 {
    let w = params.cutoff;
    let b = params.beta;
    let phase = Complex64::from_polar(1.0, -params.omega0 * t);
    let vacuum = Complex64::new(t * w, 1.0);
    let z = Complex64::new(1.0, -t * w) / (w * b);
    // Re z = 1/(Wβ) > 0 for validated parameters, far from every pole.
    let psi1 = trigamma(z).expect("trigamma argument has positive real part");
    phase * (w * w / (vacuum * vacuum) + 2.0 * psi1 / (b * b))
}

fn correlator_options(t: f64, params: &BathParams) -> QuadOptions {
    // Resolve both the 1/W transient and the ω₀ oscillation.
    let scale = (1.0 / params.cutoff).min(1.0 / params.omega0).min(1.0);
    let pieces = ((t / scale).ceil() as usize).clamp(1, 100_000);
    QuadOptions {
        abs_tol: 1e-14,
        rel_tol: 1e-12,
        initial_pieces: pieces,
        max_intervals: pieces + 50_000,
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::Domain {
            value: t,
            reason: "correlator time must be finite and non-negative",
        });
    }
    Ok(())
}

/// Zero-temperature correlator `f(t)`.
pub fn corr_f(t: f64, params: &BathParams) -> Result<Complex64> {
    check_time(t)?;
    let r = quad::integrate(|s| kernel(s, params), 0.0, t, correlator_options(t, params))?;
    Ok(r.value)
}

/// Finite-temperature correlator `f(t, β)`.
pub fn corr_f_beta(t: f64, params: &BathParams) -> Result<Complex64> {
    check_time(t)?;
    let r = quad::integrate(
        |s| kernel_thermal(s, params),
        0.0,
        t,
        correlator_options(t, params),
    )?;
    Ok(r.value)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationSample {
    pub t: f64,
    pub f: Complex64,
    pub f_beta: Complex64,
}

pub fn sample(t: f64, params: &BathParams) -> Result<CorrelationSample> {
    Ok(CorrelationSample {
        t,
        f: corr_f(t, params)?,
        f_beta: corr_f_beta(t, params)?,
    })
}

/// Writes samples as CSV with columns `t,re_f,im_f,re_f_beta,im_f_beta`.
pub fn write_samples_csv<W: Write>(mut out: W, samples: &[CorrelationSample]) -> std::io::Result<()> {
    writeln!(out, "t,re_f,im_f,re_f_beta,im_f_beta")?;
    for s in samples {
        writeln!(
            out,
            "{:?},{:?},{:?},{:?},{:?}",
            s.t, s.f.re, s.f.im, s.f_beta.re, s.f_beta.im
        )?;
    }
    Ok(())
}

/// Long-time limits `f(∞)` and `f(∞, β)`.
///
/// Real parts are the exact `πJ(ω₀)` and `πJ(ω₀)coth(βω₀/2)`. Imaginary
/// parts are window averages of the correlators over one period `2π/ω₀`
/// starting at `T = 500/ω₀`, which damps the slowly decaying oscillation of
/// the thermal tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkovianLimits {
    pub params: BathParams,
    pub f_inf: Complex64,
    pub f_beta_inf: Complex64,
    /// Raw window averages of `f` and `f(·, β)` (both components averaged).
    pub f_inf_averaged: Complex64,
    pub f_beta_inf_averaged: Complex64,
    /// Drift of the window averages between `[T, T+P]` and `[T+P, T+2P]`.
    pub error_estimate: f64,
}

/// Window start for the averaging route, in units of `1/ω₀`.
pub const AVERAGING_START: f64 = 500.0;

pub fn markovian_limits(params: &BathParams) -> Result<MarkovianLimits> {
    params.validate()?;
    let period = 2.0 * PI / params.omega0;
    let start = AVERAGING_START / params.omega0;

    let averaged = |kern: &dyn Fn(f64) -> Complex64| -> Result<(Complex64, Complex64)> {
        let at_start = quad::integrate(kern, 0.0, start, correlator_options(start, params))?.value;
        // (1/P)∫_T^{T+P} f = f(T) + (1/P)∫_T^{T+P} (T + P - s) f'(s) ds
        let window = |lo: f64, base: Complex64| -> Result<(Complex64, Complex64)> {
            let hi = lo + period;
            let opts = correlator_options(period, params);
            let weighted = quad::integrate(|s| kern(s) * (hi - s), lo, hi, opts)?.value;
            let total = quad::integrate(kern, lo, hi, opts)?.value;
            Ok((base + weighted / period, base + total))
        };
        let (first, at_end) = window(start, at_start)?;
        let (second, _) = window(start + period, at_end)?;
        Ok((first, second))
    };

    let (f_avg, f_avg_next) = averaged(&|s| kernel(s, params))?;
    let (fb_avg, fb_avg_next) = averaged(&|s| kernel_thermal(s, params))?;

    let re_f = PI * spectral_density(params.omega0, params);
    let re_fb = re_f / (0.5 * params.beta * params.omega0).tanh();
    let error_estimate = (f_avg - f_avg_next).norm().max((fb_avg - fb_avg_next).norm());

    Ok(MarkovianLimits {
        params: *params,
        f_inf: Complex64::new(re_f, f_avg.im),
        f_beta_inf: Complex64::new(re_fb, fb_avg.im),
        f_inf_averaged: f_avg,
        f_beta_inf_averaged: fb_avg,
        error_estimate,
    })
}

/// Tabulated `f`, `f(·, β)` and their running integrals on a uniform grid,
/// evaluated by cubic Hermite interpolation with exact derivatives.
#[derive(Debug, Clone)]
pub struct CorrelatorCache {
    params: BathParams,
    step: f64,
    f: Vec<Complex64>,
    df: Vec<Complex64>,
    int_f: Vec<Complex64>,
    fb: Vec<Complex64>,
    dfb: Vec<Complex64>,
    int_fb: Vec<Complex64>,
}

/// Default grid step in units of `1/ω₀`.
pub const DEFAULT_CACHE_STEP: f64 = 1e-3;

impl CorrelatorCache {
    /// Tabulates on `[0, t_max]` with grid step `step / ω₀`.
    pub fn new(params: BathParams, t_max: f64, step: f64) -> Result<Self> {
        params.validate()?;
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidParameter(format!("cache step must be positive, got {step}")));
        }
        check_time(t_max)?;
        let h = step / params.omega0;
        let panels = ((t_max / h).ceil() as usize).max(1);
        let n = panels + 1;

        let mut table = Self {
            params,
            step: h,
            f: Vec::with_capacity(n),
            df: Vec::with_capacity(n),
            int_f: Vec::with_capacity(n),
            fb: Vec::with_capacity(n),
            dfb: Vec::with_capacity(n),
            int_fb: Vec::with_capacity(n),
        };
        let zero = Complex64::new(0.0, 0.0);
        table.f.push(zero);
        table.fb.push(zero);
        table.int_f.push(zero);
        table.int_fb.push(zero);
        table.df.push(kernel(0.0, &params));
        table.dfb.push(kernel_thermal(0.0, &params));

        for k in 0..panels {
            let a = k as f64 * h;
            let b = (k + 1) as f64 * h;
            let (pf, _) = quad::kronrod15(&|s| kernel(s, &params), a, b);
            let (pfb, _) = quad::kronrod15(&|s| kernel_thermal(s, &params), a, b);
            let f1 = table.f[k] + pf;
            let fb1 = table.fb[k] + pfb;
            let d1 = kernel(b, &params);
            let db1 = kernel_thermal(b, &params);
            // Exact integral of the cubic Hermite interpolant over the panel.
            let hermite_area = |v0: Complex64, v1: Complex64, d0: Complex64, d1: Complex64| {
                (v0 + v1) * (0.5 * h) + (d0 - d1) * (h * h / 12.0)
            };
            let i1 = table.int_f[k] + hermite_area(table.f[k], f1, table.df[k], d1);
            let ib1 = table.int_fb[k] + hermite_area(table.fb[k], fb1, table.dfb[k], db1);
            table.f.push(f1);
            table.fb.push(fb1);
            table.df.push(d1);
            table.dfb.push(db1);
            table.int_f.push(i1);
            table.int_fb.push(ib1);
        }
        Ok(table)
    }

    pub fn params(&self) -> &BathParams {
        &self.params
    }

    pub fn t_max(&self) -> f64 {
        (self.f.len() - 1) as f64 * self.step
    }

    fn locate(&self, t: f64) -> Option<(usize, f64)> {
        if !(t >= 0.0) {
            return None;
        }
        let pos = t / self.step;
        let last = self.f.len() - 1;
        if pos > last as f64 + 1e-9 {
            return None;
        }
        let k = (pos.floor() as usize).min(last - 1);
        Some((k, pos - k as f64))
    }

    fn hermite(&self, values: &[Complex64], slopes: &[Complex64], k: usize, s: f64) -> Complex64 {
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        values[k] * h00 + values[k + 1] * h01 + (slopes[k] * h10 + slopes[k + 1] * h11) * self.step
    }

    /// `f(t)`; falls back to direct quadrature beyond the tabulated range.
    pub fn f(&self, t: f64) -> Complex64 {
        match self.locate(t) {
            Some((k, s)) => self.hermite(&self.f, &self.df, k, s),
            None => corr_f(t.max(0.0), &self.params).unwrap_or(Complex64::new(f64::NAN, f64::NAN)),
        }
    }

    pub fn f_beta(&self, t: f64) -> Complex64 {
        match self.locate(t) {
            Some((k, s)) => self.hermite(&self.fb, &self.dfb, k, s),
            None => corr_f_beta(t.max(0.0), &self.params).unwrap_or(Complex64::new(f64::NAN, f64::NAN)),
        }
    }

    /// `∫₀ᵗ f(s) ds`.
    pub fn int_f(&self, t: f64) -> Complex64 {
        match self.locate(t) {
            Some((k, s)) => self.hermite(&self.int_f, &self.f, k, s),
            None => Complex64::new(f64::NAN, f64::NAN),
        }
    }

    /// `∫₀ᵗ f(s, β) ds`.
    pub fn int_f_beta(&self, t: f64) -> Complex64 {
        match self.locate(t) {
            Some((k, s)) => self.hermite(&self.int_fb, &self.fb, k, s),
            None => Complex64::new(f64::NAN, f64::NAN),
        }
    }
}

/// Coefficient source for the transport equations: either the constant
/// Markovian limits or the tabulated time-dependent correlators.
#[derive(Debug, Clone)]
pub enum Coefficients {
    Markovian(MarkovianLimits),
    NonMarkovian(CorrelatorCache),
}

impl Coefficients {
    /// Builds the coefficient source for `regime` valid on `[0, t_max]`.
    pub fn new(params: BathParams, regime: Regime, t_max: f64, cache_step: f64) -> Result<Self> {
        match regime {
            Regime::Markovian => Ok(Self::Markovian(markovian_limits(&params)?)),
            Regime::NonMarkovian => Ok(Self::NonMarkovian(CorrelatorCache::new(
                params, t_max, cache_step,
            )?)),
        }
    }

    pub fn params(&self) -> &BathParams {
        match self {
            Self::Markovian(m) => &m.params,
            Self::NonMarkovian(c) => c.params(),
        }
    }

    pub fn regime(&self) -> Regime {
        match self {
            Self::Markovian(_) => Regime::Markovian,
            Self::NonMarkovian(_) => Regime::NonMarkovian,
        }
    }

    pub fn f(&self, t: f64) -> Complex64 {
        match self {
            Self::Markovian(m) => m.f_inf,
            Self::NonMarkovian(c) => c.f(t),
        }
    }

    pub fn f_beta(&self, t: f64) -> Complex64 {
        match self {
            Self::Markovian(m) => m.f_beta_inf,
            Self::NonMarkovian(c) => c.f_beta(t),
        }
    }

    pub fn int_f(&self, t: f64) -> Complex64 {
        match self {
            Self::Markovian(m) => m.f_inf * t,
            Self::NonMarkovian(c) => c.int_f(t),
        }
    }

    pub fn int_f_beta(&self, t: f64) -> Complex64 {
        match self {
            Self::Markovian(m) => m.f_beta_inf * t,
            Self::NonMarkovian(c) => c.int_f_beta(t),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> BathParams {
        BathParams::new(10.0, 3.0, 1.0).unwrap()
    }

    #[test]
    fn spectral_density_values() {
        let p = params();
        assert_eq!(spectral_density(0.0, &p), 0.0);
        assert!((spectral_density(10.0, &p) - 10.0 / std::f64::consts::E).abs() < 1e-14);
        assert!((spectral_density(1.0, &p) - (-0.1f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn correlators_vanish_at_zero() {
        let p = params();
        assert_eq!(corr_f(0.0, &p).unwrap(), Complex64::new(0.0, 0.0));
        assert_eq!(corr_f_beta(0.0, &p).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn correlators_reference_values() {
        // 50-digit quadrature of the closed-form kernels.
        let p = params();
        let f1 = Complex64::new(2.681_813_604_700_241_2, 10.969_447_677_703_570_7);
        let fb1 = Complex64::new(3.003_994_860_856_983_0, 10.881_185_064_299_026_6);
        assert!((corr_f(1.0, &p).unwrap() - f1).norm() < 1e-9 * f1.norm());
        assert!((corr_f_beta(1.0, &p).unwrap() - fb1).norm() < 1e-9 * fb1.norm());
    }

    #[test]
    fn zero_temperature_limit() {
        let cold = BathParams::new(10.0, 1e6, 1.0).unwrap();
        for t in [0.3, 1.0, 4.0] {
            let d = corr_f_beta(t, &cold).unwrap() - corr_f(t, &cold).unwrap();
            assert!(d.norm() < 1e-5, "t = {t}: {d}");
        }
    }

    #[test]
    fn large_time_real_part() {
        let p = params();
        let f = corr_f(200.0, &p).unwrap();
        assert!((f.re - PI * (-0.1f64).exp()).abs() < 1e-3);
    }

    #[test]
    fn detailed_balance_combination_non_negative() {
        let p = params();
        for k in 1..=40 {
            let t = 0.25 * k as f64;
            let d = corr_f_beta(t, &p).unwrap() - corr_f(t, &p).unwrap();
            assert!(d.re >= 0.0, "t = {t}");
        }
    }

    #[test]
    fn fourier_kernel_symmetries() {
        let p = params();
        let mirrored = BathParams { omega0: -1.0, ..p };
        for t in [0.2, 1.0, 3.0] {
            // J is real, so the kernels are Hermitian in t.
            assert!((kernel(-t, &p) - kernel(t, &p).conj()).norm() < 1e-12);
            let k = kernel_thermal(t, &p);
            assert!((kernel_thermal(-t, &p) - k.conj()).norm() < 1e-12 * k.norm());
            // Flipping ω₀ only changes the carrier phase.
            let carrier = Complex64::from_polar(1.0, 2.0 * t);
            assert!((kernel(t, &mirrored) - carrier * kernel(t, &p)).norm() < 1e-12);
            assert!((kernel_thermal(t, &mirrored) - carrier * k).norm() < 1e-12 * k.norm());
        }
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(BathParams::new(0.0, 3.0, 1.0).is_err());
        assert!(BathParams::new(10.0, -1.0, 1.0).is_err());
        assert!(BathParams::new(10.0, 3.0, f64::INFINITY).is_err());
        assert!(corr_f(-1.0, &params()).is_err());
    }

    #[test]
    fn markovian_real_parts() {
        let m = markovian_limits(&params()).unwrap();
        assert!((m.f_inf.re - 2.842_630_585_194_927).abs() < 1e-12);
        assert!((m.f_beta_inf.re - 3.140_513_803_952_196).abs() < 1e-12);
        assert!((m.f_inf_averaged.re - m.f_inf.re).abs() < 1e-4);
        assert!((m.f_beta_inf_averaged.re - m.f_beta_inf.re).abs() < 1e-4);
        assert!(m.error_estimate < 1e-4);
    }

    #[test]
    fn cache_matches_direct_evaluation() {
        let p = params();
        let cache = CorrelatorCache::new(p, 5.0, DEFAULT_CACHE_STEP).unwrap();
        for t in [0.0, 0.0123, 0.5, 1.2345, 4.9999] {
            assert!((cache.f(t) - corr_f(t, &p).unwrap()).norm() < 1e-8);
            assert!((cache.f_beta(t) - corr_f_beta(t, &p).unwrap()).norm() < 1e-8);
        }
        // running integral against direct quadrature of f
        let direct = quad::integrate(|s| corr_f(s, &p).unwrap(), 0.0, 3.0, QuadOptions::default().with_pieces(30))
            .unwrap()
            .value;
        assert!((cache.int_f(3.0) - direct).norm() < 1e-8);
    }

    #[test]
    fn csv_layout() {
        let p = params();
        let mut buf = Vec::new();
        write_samples_csv(&mut buf, &[sample(0.0, &p).unwrap()]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "t,re_f,im_f,re_f_beta,im_f_beta\n0.0,0.0,0.0,0.0,0.0\n");
    }
}
