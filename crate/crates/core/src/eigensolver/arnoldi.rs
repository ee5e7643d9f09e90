use faer::Mat;
use log::{debug, warn};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::factor::{factorize, reduced, shifted, LuFactor};
use super::{certify, norm, ArnoldiReport, EigenPair, SolverConfig};
use crate::assembly::Pencil;
use crate::error::{Error, Result};

/// Loss of orthogonality that triggers a second Gram-Schmidt pass.
const REORTH_THRESHOLD: f64 = 1e-8;
/// Ritz estimates above this fraction of `|theta|` skip the residual check.
const PREFILTER: f64 = 1e-4;
/// Relative band around the `nev`-th eigenvalue searched in verification.
const VERIFY_BAND: f64 = 1e-6;

struct Operator<'a> {
    pencil: &'a Pencil,
    sigma: Complex64,
    /// Factors of `A - sigma B - sigma^2 C` for block pencils, of
    /// `L - sigma R` otherwise.
    lu: LuFactor,
}

impl<'a> Operator<'a> {
    fn new(pencil: &'a Pencil, sigma: Complex64) -> Result<Self> {
        let lu = match &pencil.blocks {
            Some(b) => factorize(&reduced(b, sigma))?,
            None => factorize(&shifted(pencil, sigma))?,
        };
        Ok(Operator { pencil, sigma, lu })
    }

    /// `(L - sigma R)^{-1} R x`
    fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        let Some(blocks) = &self.pencil.blocks else {
            let mut y = self.pencil.right.mul_complex(x);
            self.lu.solve_in_place(&mut y)?;
            return Ok(y);
        };
        // z1 = K^{-1} (B x1 + C (x2 + sigma x1)),  z2 = sigma z1 + x1
        let n = blocks.a.nrows;
        let (x1, x2) = x.split_at(n);
        let t: Vec<Complex64> = x2.iter().zip(x1).map(|(b, a)| b + self.sigma * a).collect();
        let mut z = blocks.b.mul_complex(x1);
        for (zi, ci) in z.iter_mut().zip(blocks.c.mul_complex(&t)) {
            *zi += ci;
        }
        self.lu.solve_in_place(&mut z)?;
        let z2: Vec<Complex64> = z
            .iter()
            .zip(x1)
            .map(|(zi, a)| self.sigma * zi + a)
            .collect();
        z.extend(z2);
        Ok(z)
    }
}

struct Factorization {
    basis: Vec<Vec<Complex64>>,
    /// Column-major upper Hessenberg matrix, `(k + 1) x k`.
    h: Vec<Vec<Complex64>>,
    k: usize,
    beta: f64,
}

struct Ritz {
    theta: Complex64,
    y: Vec<Complex64>,
    estimate: f64,
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn axpy(alpha: Complex64, x: &[Complex64], y: &mut [Complex64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn scale(x: &mut [Complex64], s: f64) {
    for z in x {
        *z *= s;
    }
}

/// Orthogonalizes `w` against `locked` and `basis` (modified Gram-Schmidt,
/// one extra pass on loss of orthogonality). Returns the coefficients
/// against `basis`.
fn orthogonalize(
    w: &mut [Complex64],
    locked: &[Vec<Complex64>],
    basis: &[Vec<Complex64>],
) -> Vec<Complex64> {
    let mut coef = vec![Complex64::default(); basis.len()];
    for q in locked {
        let c = dot(q, w);
        axpy(-c, q, w);
    }
    for (i, v) in basis.iter().enumerate() {
        let c = dot(v, w);
        axpy(-c, v, w);
        coef[i] += c;
    }
    let wn = norm(w);
    let second: Vec<Complex64> = locked.iter().chain(basis).map(|v| dot(v, w)).collect();
    if second.iter().any(|c| c.norm() > REORTH_THRESHOLD * wn) {
        for (i, (v, c)) in locked.iter().chain(basis).zip(&second).enumerate() {
            axpy(-c, v, w);
            if i >= locked.len() {
                coef[i - locked.len()] += c;
            }
        }
    }
    coef
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), 0.0))
        .collect()
}

fn arnoldi(
    op: &Operator,
    locked: &[Vec<Complex64>],
    v0: Vec<Complex64>,
    kmax: usize,
) -> Result<Factorization> {
    let mut basis = vec![v0];
    let mut h: Vec<Vec<Complex64>> = Vec::with_capacity(kmax);
    for j in 0..kmax {
        let mut w = op.apply(&basis[j])?;
        let before = norm(&w);
        let mut col = orthogonalize(&mut w, locked, &basis);
        let beta = norm(&w);
        col.push(Complex64::new(beta, 0.0));
        h.push(col);
        if beta <= 1e-12 * before || beta == 0.0 {
            return Ok(Factorization {
                basis,
                h,
                k: j + 1,
                beta: 0.0,
            });
        }
        scale(&mut w, 1.0 / beta);
        basis.push(w);
    }
    let beta = h[kmax - 1][kmax].re;
    Ok(Factorization {
        basis,
        h,
        k: kmax,
        beta,
    })
}

fn ritz_pairs(f: &Factorization) -> Result<Vec<Ritz>> {
    let k = f.k;
    let hk = Mat::<Complex64>::from_fn(k, k, |i, j| {
        if i <= j + 1 {
            f.h[j][i]
        } else {
            Complex64::default()
        }
    });
    let eig = hk
        .eigen()
        .map_err(|e| Error::Factorization(format!("Hessenberg eigenproblem: {e:?}")))?;
    let s = eig.S().column_vector();
    let u = eig.U();
    let mut out: Vec<Ritz> = (0..k)
        .map(|i| {
            let mut y: Vec<Complex64> = (0..k).map(|r| u[(r, i)]).collect();
            let yn = norm(&y);
            scale(&mut y, 1.0 / yn);
            Ritz {
                theta: s[i],
                estimate: f.beta * y[k - 1].norm(),
                y,
            }
        })
        .collect();
    out.sort_by(|a, b| b.theta.norm().total_cmp(&a.theta.norm()));
    Ok(out)
}

fn combine(basis: &[Vec<Complex64>], y: &[Complex64]) -> Vec<Complex64> {
    let mut x = vec![Complex64::default(); basis[0].len()];
    for (v, c) in basis.iter().zip(y) {
        axpy(*c, v, &mut x);
    }
    let n = norm(&x);
    scale(&mut x, 1.0 / n);
    x
}

/// Turns a Ritz vector `x` of the operator deflated by the Schur basis `q`
/// into an eigenvector `x + q s` of the full operator, where
/// `(theta - q^H OP q) s = q^H (OP x - theta x)`.
fn lift(
    op: &Operator,
    q: &[Vec<Complex64>],
    images: &[Vec<Complex64>],
    theta: Complex64,
    x: &[Complex64],
) -> Result<Vec<Complex64>> {
    if q.is_empty() {
        return Ok(x.to_vec());
    }
    let p = q.len();
    let mut r = op.apply(x)?;
    axpy(-theta, x, &mut r);
    let c = DVector::from_iterator(p, q.iter().map(|qi| dot(qi, &r)));
    let shifted = DMatrix::from_fn(p, p, |i, j| {
        let t = dot(&q[i], &images[j]);
        if i == j {
            theta - t
        } else {
            -t
        }
    });
    let cutoff = 1e-12 * shifted.norm().max(theta.norm());
    let s = shifted
        .svd(true, true)
        .solve(&c, cutoff)
        .map_err(|e| Error::Factorization(e.to_string()))?;
    let mut v = x.to_vec();
    for (qi, si) in q.iter().zip(s.iter()) {
        axpy(*si, qi, &mut v);
    }
    let n = norm(&v);
    scale(&mut v, 1.0 / n);
    Ok(v)
}

/// Eigenvalues of `L x = lambda R x` nearest `config.shift`.
///
/// Explicitly restarted Arnoldi on `(L - sigma R)^{-1} R` with locking of
/// converged Ritz vectors. A pair is accepted once its pencil residual is at
/// most `config.tolerance`. After `nev` plus a few extra pairs are locked,
/// fresh start vectors deflated against them check that no eigenvalue of
/// the wanted range (including further copies of a multiple one) was missed.
pub fn shift_invert_arnoldi(pencil: &Pencil, config: &SolverConfig) -> Result<ArnoldiReport> {
    let dim = pencil.left.nrows;
    if pencil.left.ncols != dim || pencil.right.nrows != dim || pencil.right.ncols != dim {
        return Err(Error::InvalidArgument(
            "pencil matrices must be square and of equal size".into(),
        ));
    }
    if config.nev == 0 || config.nev > dim {
        return Err(Error::InvalidArgument(format!(
            "nev = {} outside 1..={dim}",
            config.nev
        )));
    }
    if !config.tolerance.is_finite() || config.tolerance <= 0.0 {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let sigma = config.shift;
    if pencil.blocks.as_ref().is_some_and(|b| 2 * b.a.nrows != dim) {
        return Err(Error::InvalidArgument(
            "pencil blocks do not match its size".into(),
        ));
    }
    let op = Operator::new(pencil, sigma)?;
    let target = (config.nev + (config.nev / 2).max(2)).min(dim);
    let m = config.krylov_dim.max(2 * config.nev + 2).min(dim);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut schur: Vec<Vec<Complex64>> = Vec::new();
    // OP applied to each Schur vector
    let mut images: Vec<Vec<Complex64>> = Vec::new();
    let mut pairs: Vec<EigenPair> = Vec::new();
    let mut start = random_vector(&mut rng, dim);
    let mut restarts = 0;
    let mut done = false;
    // unconverged Ritz values of the last cycle are all outside the wanted range
    let mut settled = false;
    while restarts <= config.max_restarts {
        let available = dim - schur.len();
        if available == 0 {
            done = true;
            break;
        }
        let verifying = pairs.len() >= target || (settled && pairs.len() >= config.nev);
        let mut v0 = start;
        orthogonalize(&mut v0, &schur, &[]);
        let mut vn = norm(&v0);
        while vn < 1e-8 {
            v0 = random_vector(&mut rng, dim);
            orthogonalize(&mut v0, &schur, &[]);
            vn = norm(&v0);
        }
        scale(&mut v0, 1.0 / vn);
        let fact = arnoldi(&op, &schur, v0, m.min(available))?;
        let ritz = ritz_pairs(&fact)?;

        let floor = |pairs: &[EigenPair]| {
            let mut mags: Vec<f64> = pairs.iter().map(|p| p.theta.norm()).collect();
            mags.sort_by(|a, b| b.total_cmp(a));
            mags.get(config.nev - 1)
                .map_or(0.0, |m| m * (1.0 - VERIFY_BAND))
        };
        let wanted: Vec<&Ritz> = if verifying {
            let floor = floor(&pairs);
            ritz.iter().filter(|r| r.theta.norm() >= floor).collect()
        } else {
            ritz.iter().take(target - pairs.len()).collect()
        };
        if verifying && wanted.is_empty() {
            done = true;
            break;
        }

        let mut pending = Vec::new();
        let mut pending_mag: f64 = 0.0;
        for r in wanted {
            let x = combine(&fact.basis[..fact.k], &r.y);
            let accepted = if r.estimate <= PREFILTER * r.theta.norm() && r.theta.norm() > 0.0 {
                let lambda = sigma + r.theta.inv();
                let rho = certify(pencil, lambda, &x);
                if rho <= config.tolerance {
                    Some((lambda, rho, x.clone()))
                } else {
                    let v = lift(&op, &schur, &images, r.theta, &x)?;
                    let rho = certify(pencil, lambda, &v);
                    (rho <= config.tolerance).then_some((lambda, rho, v))
                }
            } else {
                None
            };
            match accepted {
                Some((lambda, rho, v)) => {
                    let mut q = x.clone();
                    orthogonalize(&mut q, &schur, &[]);
                    let qn = norm(&q);
                    if qn < 1e-8 {
                        continue;
                    }
                    scale(&mut q, 1.0 / qn);
                    images.push(op.apply(&q)?);
                    schur.push(q);
                    debug!(
                        "event=lock lambda_re={} lambda_im={} residual={:e} restart={}",
                        lambda.re, lambda.im, rho, restarts
                    );
                    let vector = config.keep_vectors.then_some(v);
                    pairs.push(EigenPair::new(lambda, r.theta, rho, vector));
                }
                None => {
                    pending_mag = pending_mag.max(r.theta.norm());
                    pending.push(x);
                }
            }
        }
        settled = pairs.len() >= config.nev && pending_mag < floor(&pairs);

        let entering = !verifying && (pairs.len() >= target || settled);
        start = if pending.is_empty() || entering {
            random_vector(&mut rng, dim)
        } else {
            let mut s = random_vector(&mut rng, dim);
            let sn = norm(&s);
            scale(&mut s, 1e-3 / sn);
            for x in &pending {
                axpy(Complex64::new(1.0, 0.0), x, &mut s);
            }
            s
        };
        restarts += 1;
    }

    pairs.sort_by(|a, b| b.theta.norm().total_cmp(&a.theta.norm()));
    pairs.truncate(config.nev);
    let converged = done && pairs.len() >= config.nev;
    if !converged {
        warn!(
            "event=arnoldi_incomplete shift_re={} shift_im={} converged={} wanted={} restarts={}",
            sigma.re,
            sigma.im,
            pairs.len(),
            config.nev,
            restarts
        );
    }
    Ok(ArnoldiReport {
        pairs,
        converged,
        restarts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::CsrMatrix;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn diag_pencil(d: &[f64]) -> Pencil {
        let n = d.len();
        Pencil {
            left: CsrMatrix::from_triplets(
                n,
                n,
                d.iter().enumerate().map(|(i, &v)| (i, i, v)).collect(),
            ),
            right: CsrMatrix::identity(n),
            blocks: None,
        }
    }

    #[test]
    fn identity_pencil() {
        let p = diag_pencil(&[1.0; 5]);
        let cfg = SolverConfig {
            shift: c(0.3),
            nev: 3,
            ..Default::default()
        };
        let rep = shift_invert_arnoldi(&p, &cfg).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.pairs.len(), 3);
        for pair in &rep.pairs {
            assert!((pair.lambda - 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn diagonal_nearest_two() {
        let p = diag_pencil(&[1.0, 2.0, 3.0]);
        let cfg = SolverConfig {
            shift: c(0.9),
            nev: 2,
            ..Default::default()
        };
        let rep = shift_invert_arnoldi(&p, &cfg).unwrap();
        let l: Vec<f64> = rep.pairs.iter().map(|p| p.lambda.re).collect();
        assert!(
            (l[0] - 1.0).abs() < 1e-12 && (l[1] - 2.0).abs() < 1e-12,
            "{l:?}"
        );
        for pair in &rep.pairs {
            assert!(((pair.theta * (pair.lambda - 0.9)) - 1.0).norm() <= 1e-12);
        }
    }

    #[test]
    fn multiple_eigenvalue_found_twice() {
        let d: Vec<f64> = (0..60)
            .map(|i| [5.0, 2.0, 2.0, 7.0][i % 4] + (i / 4) as f64 * 0.37)
            .collect();
        let p = diag_pencil(&d);
        let cfg = SolverConfig {
            shift: c(1.9),
            nev: 3,
            krylov_dim: 12,
            ..Default::default()
        };
        let rep = shift_invert_arnoldi(&p, &cfg).unwrap();
        let l: Vec<f64> = rep.pairs.iter().map(|p| p.lambda.re).collect();
        assert!(
            (l[0] - 2.0).abs() < 1e-10 && (l[1] - 2.0).abs() < 1e-10,
            "{l:?}"
        );
        assert!((l[2] - 2.37).abs() < 1e-10, "{l:?}");
    }

    #[test]
    fn rotation_block_gives_conjugate_pair() {
        // L = [[a, -b], [b, a]] has eigenvalues a +- i b
        let mut t = vec![(0, 0, 3.0), (0, 1, -0.5), (1, 0, 0.5), (1, 1, 3.0)];
        for i in 2..30 {
            t.push((i, i, 4.0 + i as f64));
        }
        let p = Pencil {
            left: CsrMatrix::from_triplets(30, 30, t),
            right: CsrMatrix::identity(30),
            blocks: None,
        };
        let cfg = SolverConfig {
            shift: c(2.5),
            nev: 2,
            ..Default::default()
        };
        let rep = shift_invert_arnoldi(&p, &cfg).unwrap();
        let mut l: Vec<Complex64> = rep.pairs.iter().map(|p| p.lambda).collect();
        l.sort_by(|a, b| a.im.total_cmp(&b.im));
        assert!((l[0] - Complex64::new(3.0, -0.5)).norm() < 1e-12);
        assert!((l[1] - Complex64::new(3.0, 0.5)).norm() < 1e-12);
    }

    #[test]
    fn reduced_operator_matches_full_solve() {
        use crate::experiments::{build_problem, ExperimentConfig};
        for mass in ["identity", "gram"] {
            let cfg = ExperimentConfig::parse(&format!("levels = 3\nmass = {mass}")).unwrap();
            let (_, problem, _) = build_problem(&cfg, 3, crate::Execution::Sequential).unwrap();
            let general = Pencil {
                blocks: None,
                ..problem.pencil.clone()
            };
            let sigma = Complex64::new(18.0, 4.5);
            let fast = Operator::new(&problem.pencil, sigma).unwrap();
            let full = Operator::new(&general, sigma).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            let x = random_vector(&mut rng, 2 * problem.n);
            let (y, z) = (fast.apply(&x).unwrap(), full.apply(&x).unwrap());
            let diff: Vec<Complex64> = y.iter().zip(&z).map(|(a, b)| a - b).collect();
            assert!(
                norm(&diff) <= 1e-10 * norm(&z),
                "{mass}: {:e}",
                norm(&diff) / norm(&z)
            );
        }
    }

    #[test]
    fn rejects_bad_config() {
        let p = diag_pencil(&[1.0, 2.0]);
        assert!(shift_invert_arnoldi(
            &p,
            &SolverConfig {
                nev: 3,
                ..Default::default()
            }
        )
        .is_err());
        assert!(shift_invert_arnoldi(
            &p,
            &SolverConfig {
                nev: 1,
                tolerance: 0.0,
                ..Default::default()
            }
        )
        .is_err());
        let singular = SolverConfig {
            shift: c(1.0),
            nev: 1,
            ..Default::default()
        };
        assert!(matches!(
            shift_invert_arnoldi(&p, &singular),
            Err(Error::Singular { .. })
        ));
    }
}
