//! Dormand-Prince 5(4) integration of small complex ODE systems with dense
//! output at requested sample times.

use num_complex::Complex64;

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];

/// Fifth minus embedded fourth order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Dense-output weights (Hairer's continuous extension).
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// Initial value problem `y' = rhs(t, y)` on `[t0, t1]`.
pub struct OdeProblem<F> {
    pub rhs: F,
    pub t0: f64,
    pub t1: f64,
    pub y0: Vec<Complex64>,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Upper bound on the step; `None` leaves it to error control.
    pub max_step: Option<f64>,
}

impl<F> OdeProblem<F>
where
    F: Fn(f64, &[Complex64], &mut [Complex64]),
{
    pub fn new(rhs: F, t0: f64, t1: f64, y0: Vec<Complex64>) -> Self {
        Self {
            rhs,
            t0,
            t1,
            y0,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: None,
        }
    }

    pub fn tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    pub fn max_step(mut self, h: f64) -> Self {
        self.max_step = Some(h);
        self
    }

    fn validate(&self, samples: &[f64]) -> Result<()> {
        if self.y0.is_empty() {
            return Err(Error::InvalidParameter("ODE dimension must be at least 1".into()));
        }
        if !(self.t1 > self.t0) {
            return Err(Error::InvalidParameter(format!(
                "need t1 > t0, got [{}, {}]",
                self.t0, self.t1
            )));
        }
        for (name, tol) in [("rel_tol", self.rel_tol), ("abs_tol", self.abs_tol)] {
            if !(tol > 0.0 && tol <= 1e-2) {
                return Err(Error::InvalidParameter(format!("{name} must be in (0, 1e-2], got {tol}")));
            }
        }
        if let Some(h) = self.max_step {
            if !(h > 0.0) {
                return Err(Error::InvalidParameter(format!("max_step must be positive, got {h}")));
            }
        }
        if samples.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("sample times must be strictly increasing".into()));
        }
        if let (Some(&first), Some(&last)) = (samples.first(), samples.last()) {
            if first < self.t0 || last > self.t1 {
                return Err(Error::InvalidParameter(format!(
                    "sample times must lie in [{}, {}]",
                    self.t0, self.t1
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub sample_times: Vec<f64>,
    pub states: Vec<Vec<Complex64>>,
    /// Accepted and rejected step counts.
    pub accepted: usize,
    pub rejected: usize,
}

/// Integrates `problem` and returns the state at each of `sample_times`.
pub fn integrate<F>(problem: &OdeProblem<F>, sample_times: &[f64]) -> Result<Trajectory>
where
    F: Fn(f64, &[Complex64], &mut [Complex64]),
{
    problem.validate(sample_times)?;
    let n = problem.y0.len();
    let span = problem.t1 - problem.t0;
    let h_max = problem.max_step.unwrap_or(span).min(span);

    let mut traj = Trajectory {
        sample_times: sample_times.to_vec(),
        states: Vec::with_capacity(sample_times.len()),
        accepted: 0,
        rejected: 0,
    };
    let mut next_sample = 0;

    let mut t = problem.t0;
    let mut y = problem.y0.clone();
    let zero = Complex64::new(0.0, 0.0);
    let mut k = vec![vec![zero; n]; 7];
    (problem.rhs)(t, &y, &mut k[0]);

    while next_sample < sample_times.len() && sample_times[next_sample] == t {
        traj.states.push(y.clone());
        next_sample += 1;
    }

    let mut h = initial_step(problem, &y, &k[0]).min(h_max);
    let mut stage = vec![zero; n];
    let mut y_new = vec![zero; n];
    let mut err_prev = 1e-4_f64;

    while t < problem.t1 && next_sample < sample_times.len() {
        if t + h > problem.t1 || problem.t1 - (t + h) < 1e-12 * span {
            h = problem.t1 - t;
        }
        if h <= 1e-14 * t.abs().max(1.0) {
            return Err(Error::StepUnderflow { t });
        }

        for s in 1..7 {
            for i in 0..n {
                let mut acc = zero;
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += kj[i] * A[s][j];
                }
                stage[i] = y[i] + acc * h;
            }
            (problem.rhs)(t + C[s] * h, &stage, &mut k[s]);
        }
        // Stage 7 was evaluated at the 5th-order solution (FSAL).
        y_new.copy_from_slice(&stage);

        let mut err: f64 = 0.0;
        for i in 0..n {
            let mut e = zero;
            for s in 0..7 {
                e += k[s][i] * E[s];
            }
            let scale = problem.abs_tol + problem.rel_tol * y[i].norm().max(y_new[i].norm());
            err = err.max((e * h).norm() / scale);
        }
        if !err.is_finite() {
            traj.rejected += 1;
            h *= 0.25;
            continue;
        }

        if err <= 1.0 {
            let t_new = t + h;
            // Dense output for samples inside (t, t_new].
            while next_sample < sample_times.len() && sample_times[next_sample] <= t_new {
                let theta = (sample_times[next_sample] - t) / h;
                traj.states.push(dense(&y, &y_new, &k, h, theta));
                next_sample += 1;
            }
            traj.accepted += 1;
            t = t_new;
            std::mem::swap(&mut y, &mut y_new);
            let last = std::mem::take(&mut k[6]);
            k[0] = last;
            k[6] = vec![zero; n];
            // PI controller
            let factor = 0.9 * err.max(1e-10).powf(-0.7 / 5.0) * err_prev.powf(0.4 / 5.0);
            err_prev = err.max(1e-4);
            h = (h * factor.clamp(0.2, 5.0)).min(h_max);
        } else {
            traj.rejected += 1;
            let factor = 0.9 * err.powf(-0.2);
            h *= factor.clamp(0.1, 0.9);
        }
    }
    Ok(traj)
}

fn initial_step<F>(problem: &OdeProblem<F>, y: &[Complex64], dy: &[Complex64]) -> f64 {
    let mut d0: f64 = 0.0;
    let mut d1: f64 = 0.0;
    for (yi, di) in y.iter().zip(dy) {
        let scale = problem.abs_tol + problem.rel_tol * yi.norm();
        d0 = d0.max(yi.norm() / scale);
        d1 = d1.max(di.norm() / scale);
    }
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h.max(1e-10 * (problem.t1 - problem.t0))
}

fn dense(y0: &[Complex64], y1: &[Complex64], k: &[Vec<Complex64>], h: f64, theta: f64) -> Vec<Complex64> {
    let s1 = 1.0 - theta;
    (0..y0.len())
        .map(|i| {
            let r1 = y1[i] - y0[i];
            let r2 = k[0][i] * h - r1;
            let r3 = r1 - k[6][i] * h - r2;
            let mut r4 = Complex64::new(0.0, 0.0);
            for s in 0..7 {
                r4 += k[s][i] * D[s];
            }
            let r4 = r4 * h;
            y0[i] + (r1 + (r2 + (r3 + r4 * s1) * theta) * s1) * theta
        })
        .collect()
}
