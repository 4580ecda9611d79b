//! Finite-dimensional relevant distributions
//!
//! ```text
//! ρ_rel = exp(-Φ - Σ F_m P_m),   Φ = ln Tr exp(-Σ F_m P_m)
//! ```
//!
//! The multipliers `F_m` are fixed by the self-consistency conditions
//! `⟨P_m⟩ = Tr(P_m ρ_rel)`. Operators come either Hermitian (real multiplier)
//! or in adjoint pairs `(P, P†)` whose multipliers are complex conjugates, so
//! the exponent is Hermitian for every admissible multiplier vector.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

const HERMITIAN_TOL: f64 = 1e-12;
const PAIRING_TOL: f64 = 1e-14;

/// Exponent eigenvalue spread treated as the edge of the attainable moments.
pub const MAX_EXPONENT_SPREAD: f64 = 700.0;

/// Smallest singular value of the moment Jacobian accepted at a solution.
const MIN_SENSITIVITY: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct RelevantOperatorSet {
    dim: usize,
    operators: Vec<CMatrix>,
    /// `partner[m] == m` for Hermitian operators, otherwise the index of `P_m†`.
    partner: Vec<usize>,
}

impl RelevantOperatorSet {
    /// `pairs` lists index pairs `(m, m')` with `P_{m'} = P_m†`; every other
    /// operator must be Hermitian.
    pub fn new(operators: Vec<CMatrix>, pairs: &[(usize, usize)]) -> Result<Self> {
        let Some(first) = operators.first() else {
            return Err(Error::InvalidParameter("empty operator set".into()));
        };
        let dim = first.nrows();
        if dim < 2 {
            return Err(Error::InvalidParameter("operator dimension must be at least 2".into()));
        }
        if let Some(m) = operators.iter().position(|p| p.nrows() != dim || p.ncols() != dim) {
            return Err(Error::InvalidParameter(format!("operator {m} is not {dim}x{dim}")));
        }
        let n = operators.len();
        let mut partner: Vec<usize> = (0..n).collect();
        for &(a, b) in pairs {
            if a >= n || b >= n || a == b || partner[a] != a || partner[b] != b {
                return Err(Error::Pairing(format!("invalid or overlapping pair ({a}, {b})")));
            }
            partner[a] = b;
            partner[b] = a;
        }
        for m in 0..n {
            let p = partner[m];
            let deviation = (&operators[m] - operators[p].adjoint()).norm();
            let scale = operators[m].norm().max(1.0);
            if deviation > HERMITIAN_TOL * scale {
                return Err(Error::Pairing(if p == m {
                    format!("operator {m} is not Hermitian (deviation {deviation:e})")
                } else {
                    format!("operators {m} and {p} are not mutual adjoints (deviation {deviation:e})")
                }));
            }
        }
        Ok(Self { dim, operators, partner })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.operators
    }

    pub fn partner(&self, m: usize) -> usize {
        self.partner[m]
    }

    /// Checks the pairing constraint on a multiplier-like or moment-like vector.
    fn check_paired(&self, values: &[Complex64], tol: f64, what: &str) -> Result<()> {
        if values.len() != self.len() {
            return Err(Error::InvalidParameter(format!(
                "{what} has {} entries, expected {}",
                values.len(),
                self.len()
            )));
        }
        for (m, v) in values.iter().enumerate() {
            let p = self.partner[m];
            let deviation = (values[p] - v.conj()).norm();
            if deviation > tol * v.norm().max(1.0) {
                return Err(Error::Pairing(format!(
                    "{what}[{m}] = {v} violates the pairing with entry {p} (deviation {deviation:e})"
                )));
            }
        }
        Ok(())
    }

    /// Hermitian exponent `Σ F_m P_m`, symmetrized against round-off.
    fn exponent(&self, multipliers: &[Complex64]) -> CMatrix {
        let mut h = CMatrix::zeros(self.dim, self.dim);
        for (f, p) in multipliers.iter().zip(&self.operators) {
            h += p * *f;
        }
        (&h + h.adjoint()) * Complex64::new(0.5, 0.0)
    }

    /// Real coordinates of the independent multipliers: one per Hermitian
    /// operator and two (real, imaginary) per adjoint pair.
    fn coordinates(&self) -> Vec<(usize, bool)> {
        let mut coords = Vec::new();
        for m in 0..self.len() {
            let p = self.partner[m];
            if p == m {
                coords.push((m, false));
            } else if m < p {
                coords.push((m, false));
                coords.push((m, true));
            }
        }
        coords
    }

    fn pack(&self, values: &[Complex64]) -> DVector<f64> {
        let coords = self.coordinates();
        DVector::from_iterator(
            coords.len(),
            coords.iter().map(|&(m, imag)| if imag { values[m].im } else { values[m].re }),
        )
    }

    fn unpack(&self, x: &DVector<f64>) -> Vec<Complex64> {
        let mut values = vec![Complex64::new(0.0, 0.0); self.len()];
        for (&(m, imag), v) in self.coordinates().iter().zip(x.iter()) {
            if imag {
                values[m].im = *v;
            } else {
                values[m].re = *v;
            }
        }
        for m in 0..self.len() {
            let p = self.partner[m];
            if p < m {
                values[m] = values[p].conj();
            }
        }
        values
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierVector(Vec<Complex64>);

impl MultiplierVector {
    pub fn new(values: Vec<Complex64>, ops: &RelevantOperatorSet) -> Result<Self> {
        ops.check_paired(&values, PAIRING_TOL, "multiplier")?;
        Ok(Self(values))
    }

    pub fn zeros(ops: &RelevantOperatorSet) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); ops.len()])
    }

    pub fn values(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.0
    }
}

#[derive(Debug, Clone)]
pub struct RelevantState {
    pub multipliers: MultiplierVector,
    /// Massieu-Planck function `Φ`.
    pub phi: f64,
    pub rho: CMatrix,
}

/// Eigenvalues and eigenvectors of a Hermitian matrix, using the real
/// symmetric solver when the matrix has no imaginary part.
///
/// Entries below `ε²·max|h|` are zeroed first: they cannot move any
/// eigenvalue by more than the solver's own error, and strongly graded
/// inputs (thermal states with hundreds of levels) otherwise underflow in
/// the QR shifts and come back as NaN.
fn hermitian_eigen(h: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let floor = f64::EPSILON * f64::EPSILON * h.camax();
    let h = h.map(|z| {
        Complex64::new(
            if z.re.abs() < floor { 0.0 } else { z.re },
            if z.im.abs() < floor { 0.0 } else { z.im },
        )
    });
    let (values, vectors): (Vec<f64>, CMatrix) = if h.iter().all(|z| z.im == 0.0) {
        let eig = SymmetricEigen::new(h.map(|z| z.re));
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors.map(|v| Complex64::new(v, 0.0)))
    } else {
        let eig = SymmetricEigen::new(h);
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    };
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Overflow("eigendecomposition produced a non-finite eigenvalue".into()));
    }
    Ok((values, vectors))
}

/// Builds `ρ_rel` and `Φ` from the multipliers via eigendecomposition of the
/// Hermitian exponent, with a log-sum-exp shift.
pub fn build_state(multipliers: &MultiplierVector, ops: &RelevantOperatorSet) -> Result<RelevantState> {
    let (state, _) = build_with_spread(multipliers, ops)?;
    Ok(state)
}

fn build_with_spread(multipliers: &MultiplierVector, ops: &RelevantOperatorSet) -> Result<(RelevantState, f64)> {
    ops.check_paired(multipliers.values(), PAIRING_TOL, "multiplier")?;
    let h = ops.exponent(multipliers.values());
    let (eigenvalues, vectors) = hermitian_eigen(&h)?;
    let lo = eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = eigenvalues.iter().map(|v| (-(v - lo)).exp()).collect();
    let norm: f64 = weights.iter().sum();
    let phi = -lo + norm.ln();
    if !phi.is_finite() {
        return Err(Error::Overflow(format!("Massieu-Planck function is {phi}")));
    }
    let n = ops.dim();
    let mut scaled = vectors.clone();
    for (j, w) in weights.iter().enumerate() {
        let p = Complex64::new(w / norm, 0.0);
        for i in 0..n {
            scaled[(i, j)] *= p;
        }
    }
    let rho = &scaled * vectors.adjoint();
    let rho = (&rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    Ok((
        RelevantState {
            multipliers: multipliers.clone(),
            phi,
            rho,
        },
        hi - lo,
    ))
}

/// `Tr(A ρ)` without forming the product.
pub fn expectation(op: &CMatrix, rho: &CMatrix) -> Complex64 {
    let n = op.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..n {
        for i in 0..n {
            acc += op[(i, j)] * rho[(j, i)];
        }
    }
    acc
}

/// `Tr(P_m ρ)` for every relevant operator.
pub fn moments(state: &RelevantState, ops: &RelevantOperatorSet) -> Vec<Complex64> {
    ops.operators().iter().map(|p| expectation(p, &state.rho)).collect()
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Convergence threshold on `max_m |⟨P_m⟩ - target_m|`.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Relative central-difference step for the Jacobian.
    pub fd_step: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 200,
            fd_step: 1e-6,
        }
    }
}

/// Inverts the self-consistency conditions by damped Newton iteration with
/// a finite-difference Jacobian. Starts from `F = 0` unless `initial` is given.
pub fn solve_self_consistency(
    targets: &[Complex64],
    ops: &RelevantOperatorSet,
    initial: Option<&MultiplierVector>,
    opts: SolverOptions,
) -> Result<MultiplierVector> {
    ops.check_paired(targets, 1e-10, "target")?;
    let start = match initial {
        Some(f) => {
            ops.check_paired(f.values(), PAIRING_TOL, "multiplier")?;
            f.values().to_vec()
        }
        None => vec![Complex64::new(0.0, 0.0); ops.len()],
    };
    let target_vec = ops.pack(targets);

    let residual = |x: &DVector<f64>| -> Result<(DVector<f64>, f64)> {
        let f = MultiplierVector(ops.unpack(x));
        let (state, spread) = build_with_spread(&f, ops)?;
        Ok((ops.pack(&moments(&state, ops)) - &target_vec, spread))
    };
    let infeasible = |spread: f64| {
        Error::Infeasible(format!(
            "multipliers reach exponent spread {spread:.1} > {MAX_EXPONENT_SPREAD}; targets lie on or outside the boundary of the moment set"
        ))
    };

    let mut x = ops.pack(&start);
    let (mut r, spread) = residual(&x)?;
    if spread > MAX_EXPONENT_SPREAD {
        return Err(infeasible(spread));
    }
    let mut norm = r.amax();
    let dim = x.len();

    let jacobian = |x: &DVector<f64>| -> Result<DMatrix<f64>> {
        let mut jac = DMatrix::<f64>::zeros(dim, dim);
        for j in 0..dim {
            let h = opts.fd_step * x[j].abs().max(1.0);
            let mut plus = x.clone();
            plus[j] += h;
            let mut minus = x.clone();
            minus[j] -= h;
            let (rp, _) = residual(&plus)?;
            let (rm, _) = residual(&minus)?;
            jac.set_column(j, &((rp - rm) / (2.0 * h)));
        }
        Ok(jac)
    };

    for iteration in 0..=opts.max_iterations {
        let jac = jacobian(&x)?;
        if norm <= opts.tolerance {
            // A singular moment map means the targets are only reached in the
            // limit of diverging multipliers.
            let smallest = jac.singular_values().min();
            if smallest < MIN_SENSITIVITY {
                return Err(Error::Infeasible(format!(
                    "moment map is singular at the solution (smallest sensitivity {smallest:e}); targets lie on the boundary of the moment set"
                )));
            }
            return Ok(MultiplierVector(ops.unpack(&x)));
        }
        if iteration == opts.max_iterations {
            break;
        }
        let step = match jac.lu().solve(&(-&r)) {
            Some(s) if s.iter().all(|v| v.is_finite()) => s,
            _ => break,
        };

        let mut lambda = 1.0;
        let mut accepted = false;
        while lambda > 1e-10 {
            let trial = &x + &step * lambda;
            match residual(&trial) {
                Ok((rt, spread)) => {
                    if spread > MAX_EXPONENT_SPREAD {
                        return Err(infeasible(spread));
                    }
                    let nt = rt.amax();
                    if nt < (1.0 - 1e-4 * lambda) * norm {
                        x = trial;
                        r = rt;
                        norm = nt;
                        accepted = true;
                        break;
                    }
                }
                Err(Error::Overflow(_)) => {}
                Err(e) => return Err(e),
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iterations,
        residual: norm,
        best: ops.unpack(&x),
    })
}

/// `S = Φ + Σ F_m ⟨P_m⟩`.
pub fn entropy(state: &RelevantState, targets: &[Complex64]) -> Result<f64> {
    let f = state.multipliers.values();
    if targets.len() != f.len() {
        return Err(Error::InvalidParameter(format!(
            "expected {} targets, got {}",
            f.len(),
            targets.len()
        )));
    }
    let s: Complex64 = f.iter().zip(targets).map(|(f, p)| f * p).sum::<Complex64>() + state.phi;
    if s.im.abs() > 1e-10 * s.re.abs().max(1.0) {
        return Err(Error::Pairing(format!("entropy has imaginary residue {:e}", s.im)));
    }
    Ok(s.re)
}

/// `-Tr ρ ln ρ` from the eigenvalues of `ρ`, with `0 ln 0 = 0`.
pub fn von_neumann(rho: &CMatrix) -> Result<f64> {
    let n = rho.nrows();
    if n == 0 || rho.ncols() != n {
        return Err(Error::InvalidParameter("density matrix must be square and non-empty".into()));
    }
    if (rho - rho.adjoint()).camax() > 1e-10 {
        return Err(Error::InvalidParameter("density matrix is not Hermitian".into()));
    }
    let trace = rho.trace();
    if (trace - Complex64::new(1.0, 0.0)).norm() > 1e-10 {
        return Err(Error::InvalidParameter(format!("density matrix trace is {trace}")));
    }
    let (eigenvalues, _) = hermitian_eigen(&((rho + rho.adjoint()) * Complex64::new(0.5, 0.0)))?;
    let mut s = 0.0;
    for &p in &eigenvalues {
        if p < -1e-10 {
            return Err(Error::NotPositive(p));
        }
        if p > 0.0 {
            s -= p * p.ln();
        }
    }
    Ok(s)
}

/// Sum of the last `count` diagonal entries (occupation probabilities of the
/// highest truncated levels).
pub fn tail_mass(rho: &CMatrix, count: usize) -> f64 {
    let n = rho.nrows();
    (n.saturating_sub(count)..n).map(|i| rho[(i, i)].re).sum()
}

/// Standard operator matrices.
pub mod operators {
    use super::CMatrix;
    use num_complex::Complex64;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    /// Spin-½ `σ₊`, `σ_z = diag(½, -½)`, `σ₋`.
    pub fn spin_half() -> [CMatrix; 3] {
        let sp = CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)]);
        let sz = CMatrix::from_row_slice(2, 2, &[c(0.5), c(0.0), c(0.0), c(-0.5)]);
        let sm = sp.adjoint();
        [sp, sz, sm]
    }

    /// Bosonic annihilation operator truncated to `levels` Fock states.
    pub fn annihilation(levels: usize) -> CMatrix {
        let mut a = CMatrix::zeros(levels, levels);
        for n in 1..levels {
            a[(n - 1, n)] = c((n as f64).sqrt());
        }
        a
    }

    pub fn number(levels: usize) -> CMatrix {
        CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            levels,
            (0..levels).map(|n| c(n as f64)),
        ))
    }
}
