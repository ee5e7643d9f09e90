//! Shift-invert Arnoldi for the block pencil `L x = lambda R x`.

mod arnoldi;
mod factor;
mod scan;

use num_complex::Complex64;

use crate::assembly::Pencil;

pub use arnoldi::shift_invert_arnoldi;
pub use factor::{factorize, shifted, LuFactor};
pub use scan::{dedup_tolerance, scan_shifts};

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub shift: Complex64,
    pub nev: usize,
    /// Krylov subspace dimension; raised to at least `2 nev + 2`.
    pub krylov_dim: usize,
    /// Bound on the residual of every returned pair.
    pub tolerance: f64,
    pub max_restarts: usize,
    /// Seed of the start vectors.
    pub seed: u64,
    pub keep_vectors: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            shift: Complex64::new(0.0, 0.0),
            nev: 6,
            krylov_dim: 40,
            tolerance: 1e-10,
            max_restarts: 300,
            seed: 0x5eed,
            keep_vectors: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EigenPair {
    pub lambda: Complex64,
    /// Principal square root of `lambda`, `Re k >= 0`.
    pub k: Complex64,
    /// Eigenvalue of the shift-inverted operator, `1 / (lambda - shift)`.
    pub theta: Complex64,
    pub residual: f64,
    /// Unit eigenvector `(u, omega)` of the block pencil.
    pub vector: Option<Vec<Complex64>>,
}

impl EigenPair {
    pub fn new(
        lambda: Complex64,
        theta: Complex64,
        residual: f64,
        vector: Option<Vec<Complex64>>,
    ) -> Self {
        EigenPair {
            lambda,
            k: principal_sqrt(lambda),
            theta,
            residual,
            vector,
        }
    }

    /// The `u` and `omega` halves of the eigenvector.
    pub fn blocks(&self) -> Option<(&[Complex64], &[Complex64])> {
        self.vector.as_deref().map(|v| v.split_at(v.len() / 2))
    }

    pub fn conj(&self) -> EigenPair {
        EigenPair::new(
            self.lambda.conj(),
            self.theta.conj(),
            self.residual,
            self.vector
                .as_ref()
                .map(|v| v.iter().map(|z| z.conj()).collect()),
        )
    }
}

#[derive(Debug, Clone)]
pub struct ArnoldiReport {
    /// Converged pairs sorted by `|lambda - shift|`.
    pub pairs: Vec<EigenPair>,
    /// `false` when fewer than `nev` pairs converged.
    pub converged: bool,
    pub restarts: usize,
}

pub fn principal_sqrt(lambda: Complex64) -> Complex64 {
    let k = lambda.sqrt();
    if k.re < 0.0 {
        -k
    } else {
        k
    }
}

/// `|| L x - lambda R x || / || R x ||` from fresh products.
pub fn certify(pencil: &Pencil, lambda: Complex64, x: &[Complex64]) -> f64 {
    let lx = pencil.left.mul_complex(x);
    let rx = pencil.right.mul_complex(x);
    let num = lx
        .iter()
        .zip(&rx)
        .map(|(a, b)| (a - lambda * b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let den = norm(&rx);
    if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

pub(crate) fn norm(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
