//! Complex-argument special functions used by the bath correlators and the
//! two-level self-consistency solution.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Distance to a non-positive integer below which the argument is a pole.
const POLE_TOLERANCE: f64 = 1e-12;

/// Recurrence target: the asymptotic series is summed once `Re z` reaches this.
const ASYMPTOTIC_THRESHOLD: f64 = 10.0;

/// Bernoulli numbers B_2, B_4, ..., B_20.
const BERNOULLI_EVEN: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

/// Trigamma function `ψ'(z)` for complex `z`.
///
/// Arguments with `Re z < 0` go through the reflection formula; the rest are
/// shifted upward with `ψ'(z) = 1/z² + ψ'(z + 1)` until `Re z ≥ 10` and then
/// finished with the Bernoulli asymptotic series.
pub fn trigamma(z: Complex64) -> Result<Complex64> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::Domain {
            value: if z.re.is_finite() { z.im } else { z.re },
            reason: "trigamma argument must be finite",
        });
    }
    if z.re <= POLE_TOLERANCE {
        let n = (-z.re).round();
        if (z + n).norm() < POLE_TOLERANCE {
            return Err(Error::Pole(z));
        }
    }
    if z.re < 0.0 {
        // ψ'(1 - z) + ψ'(z) = π² / sin²(πz)
        let s = (z * PI).sin();
        return Ok(PI * PI / (s * s) - trigamma_right(1.0 - z));
    }
    Ok(trigamma_right(z))
}

fn trigamma_right(mut z: Complex64) -> Complex64 {
    let mut shifted = Complex64::new(0.0, 0.0);
    while z.re < ASYMPTOTIC_THRESHOLD {
        shifted += (z * z).inv();
        z += 1.0;
    }
    shifted + trigamma_asymptotic(z)
}

/// `ψ'(z) ~ 1/z + 1/(2z²) + Σ B_{2k} / z^{2k+1}`, valid for large `|z|` with
/// `Re z > 0`.
fn trigamma_asymptotic(z: Complex64) -> Complex64 {
    let inv = z.inv();
    let inv2 = inv * inv;
    // Horner in 1/z² over the Bernoulli tail, highest order first.
    let mut tail = Complex64::new(0.0, 0.0);
    for b in BERNOULLI_EVEN.iter().rev() {
        tail = tail * inv2 + *b;
    }
    inv + 0.5 * inv2 + tail * inv2 * inv
}

/// `R(X) = arctanh(2X) / X` on `0 ≤ X < 1/2`, with `R(0) = 2`.
pub fn arctanh_ratio(x: f64) -> Result<f64> {
    if !(0.0..0.5).contains(&x) {
        return Err(Error::Domain {
            value: x,
            reason: "arctanh ratio needs 0 <= X < 1/2",
        });
    }
    if x < 1e-4 {
        let x2 = x * x;
        return Ok(2.0 + x2 * (8.0 / 3.0 + x2 * (32.0 / 5.0 + x2 * (128.0 / 7.0))));
    }
    Ok((2.0 * x).atanh() / x)
}
