use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("trigamma pole at z = {0}")]
    Pole(Complex64),

    #[error("argument {value} outside domain: {reason}")]
    Domain { value: f64, reason: &'static str },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature on [{a}, {b}] did not converge (error estimate {estimate:e})")]
    Quadrature { a: f64, b: f64, estimate: f64 },

    #[error("step size underflow at t = {t} (last accepted step)")]
    StepUnderflow { t: f64 },

    #[error("pairing constraint violated: {0}")]
    Pairing(String),

    #[error("relevant distribution overflow: {0}")]
    Overflow(String),

    #[error("self-consistency did not converge after {iterations} iterations (best residual {residual:e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        best: Vec<Complex64>,
    },

    #[error("targets are not attainable by an interior state: {0}")]
    Infeasible(String),

    #[error("density matrix has eigenvalue {0:e} below tolerance")]
    NotPositive(f64),

    #[error("Fock truncation at {levels} levels leaves tail mass {tail:e}")]
    Truncation { levels: usize, tail: f64 },

    #[error("degenerate state: {0}")]
    Degenerate(String),

    #[error("invariant violated at t = {t}: {detail}")]
    InvariantViolation { t: f64, detail: String },
}
