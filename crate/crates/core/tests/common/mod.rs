//! Brute-force reference computations shared by the integration tests.
//! Nothing here calls into the library's quadrature or special functions.

#![allow(dead_code)]

use releq_core::bath::BathParams;
use releq_core::maxent::CMatrix;
use releq_core::Complex64;
use rand::Rng;

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Composite Gauss-Legendre rule on [a, b] with `panels` equal pieces.
pub fn composite_rule(a: f64, b: f64, panels: usize, order: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for (xi, wi) in x.iter().zip(&w) {
            out.push((mid + 0.5 * h * xi, 0.5 * h * wi));
        }
    }
    out
}

/// `coth(βω/2)` with its Laurent expansion near zero.
pub fn thermal_factor(omega: f64, beta: f64) -> f64 {
    let x = 0.5 * beta * omega;
    if x < 1e-4 {
        1.0 / x + x / 3.0
    } else {
        1.0 / x.tanh()
    }
}

pub fn ohmic(omega: f64, cutoff: f64) -> f64 {
    omega * (-omega / cutoff).exp()
}

/// `f(t)` and `f(t, β)` as the double integral
/// `∫₀ᵗ dt' ∫₀^∞ dω J(ω) w(ω) e^{i(ω - ω₀)t'}` with `w = 1` or `coth(βω/2)`,
/// the frequency range cut at 40 W.
pub fn correlators_2d(t: f64, p: &BathParams) -> (Complex64, Complex64) {
    let omega_max = 40.0 * p.cutoff;
    let omegas = composite_rule(0.0, omega_max, (omega_max.ceil() as usize).max(40), 20);
    let times = composite_rule(0.0, t, ((t / 0.05).ceil() as usize).max(1), 20);
    let weights: Vec<(f64, f64, f64)> = omegas
        .iter()
        .map(|&(w, dw)| {
            let j = dw * ohmic(w, p.cutoff);
            (w, j, j * thermal_factor(w, p.beta))
        })
        .collect();
    let mut f = Complex64::new(0.0, 0.0);
    let mut fb = Complex64::new(0.0, 0.0);
    for &(s, ds) in &times {
        let (mut zero, mut thermal) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for &(w, j, jb) in &weights {
            let (sin, cos) = (w * s).sin_cos();
            zero += Complex64::new(j * cos, j * sin);
            thermal += Complex64::new(jb * cos, jb * sin);
        }
        let phase = Complex64::from_polar(ds, -p.omega0 * s);
        f += phase * zero;
        fb += phase * thermal;
    }
    (f, fb)
}

/// Principal value `PV ∫₀^∞ g(ω)/(ω - ω₀) dω` by subtracting `g(ω₀)`.
pub fn principal_value<G: Fn(f64) -> f64>(g: G, omega0: f64, upper: f64) -> f64 {
    let g0 = g(omega0);
    let below = composite_rule(0.0, omega0, 64, 20);
    let above = composite_rule(omega0, upper, (upper.ceil() as usize).max(64), 20);
    let smooth: f64 = below
        .iter()
        .chain(&above)
        .map(|&(w, dw)| dw * (g(w) - g0) / (w - omega0))
        .sum();
    smooth + g0 * ((upper - omega0) / omega0).ln()
}

/// `Im f(∞)` and `Im f(∞, β)` for the ohmic bath.
pub fn markovian_imaginary_parts(p: &BathParams) -> (f64, f64) {
    let upper = 60.0 * p.cutoff;
    let zero = principal_value(|w| ohmic(w, p.cutoff), p.omega0, upper);
    let thermal = principal_value(|w| ohmic(w, p.cutoff) * thermal_factor(w, p.beta), p.omega0, upper);
    (zero, thermal)
}

pub fn binary_entropy(x: f64) -> f64 {
    let (a, b) = (0.5 + x, 0.5 - x);
    let term = |p: f64| if p > 0.0 { -p * p.ln() } else { 0.0 };
    term(a) + term(b)
}

/// Entropy of a thermal boson state with mean occupation `n`, summed level
/// by level.
pub fn thermal_entropy_by_levels(n: f64) -> f64 {
    let q = n / (n + 1.0);
    let mut p = 1.0 / (n + 1.0);
    let mut s = 0.0;
    for _ in 0..200_000 {
        if p < 1e-300 {
            break;
        }
        s -= p * p.ln();
        p *= q;
    }
    s
}

pub fn random_complex<R: Rng>(rng: &mut R, scale: f64) -> Complex64 {
    Complex64::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))
}

pub fn random_matrix<R: Rng>(rng: &mut R, dim: usize) -> CMatrix {
    CMatrix::from_fn(dim, dim, |_, _| random_complex(rng, 1.0))
}

pub fn random_hermitian<R: Rng>(rng: &mut R, dim: usize) -> CMatrix {
    let m = random_matrix(rng, dim);
    (&m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// `ρ = e^{-H}/Tr e^{-H}` by a scaled Taylor series, independent of any
/// eigendecomposition.
pub fn gibbs_by_series(h: &CMatrix) -> (CMatrix, f64) {
    let n = h.nrows();
    let norm = h.iter().map(|z| z.norm()).fold(0.0, f64::max) * n as f64;
    let squarings = (norm.max(1.0).log2().ceil() as i32 + 4).max(0);
    let scaled = h * Complex64::new(-(2f64.powi(-squarings)), 0.0);
    let mut term = CMatrix::identity(n, n);
    let mut sum = CMatrix::identity(n, n);
    for k in 1..30 {
        term = &term * &scaled * Complex64::new(1.0 / k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    let z = sum.trace().re;
    (sum * Complex64::new(1.0 / z, 0.0), z.ln())
}
