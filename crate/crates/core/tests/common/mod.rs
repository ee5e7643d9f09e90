#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use tevp::assembly::Pencil;
use tevp::sparse::CsrMatrix;

fn dense(m: &CsrMatrix<f64>) -> DMatrix<Complex64> {
    let mut d = DMatrix::zeros(m.nrows, m.ncols);
    for (i, j, v) in m.triplets() {
        d[(i, j)] += Complex64::new(v, 0.0);
    }
    d
}

fn unit(v: DVector<Complex64>) -> DVector<Complex64> {
    let n = v.norm();
    v / Complex64::new(n, 0.0)
}

fn rayleigh(w: &DMatrix<Complex64>, x: &DVector<Complex64>) -> Complex64 {
    x.dotc(&(w * x))
}

/// Inverse iteration on `w` near `theta` until `|w x - theta x| <= tol |theta|`.
fn polish(
    w: &DMatrix<Complex64>,
    mut theta: Complex64,
    mut x: DVector<Complex64>,
    tol: f64,
) -> (Complex64, DVector<Complex64>) {
    let n = w.nrows();
    for _ in 0..50 {
        let res = (w * &x - &x * theta).norm();
        if res <= tol * theta.norm() {
            break;
        }
        let shifted = w - DMatrix::<Complex64>::identity(n, n) * theta;
        match shifted.lu().solve(&x) {
            Some(z) if z.iter().all(|c| c.re.is_finite() && c.im.is_finite()) => x = unit(z),
            _ => break,
        }
        theta = rayleigh(w, &x);
    }
    (theta, x)
}

/// Brute-force eigenvalues of the pencil nearest `sigma`: dense
/// `W = (L - sigma R)^{-1} R`, power iteration, inverse-iteration polishing
/// and Hotelling deflation `W - theta x x^H` after each eigenvalue.
pub fn dense_oracle(pencil: &Pencil, sigma: Complex64, count: usize, tol: f64) -> Vec<Complex64> {
    let l = dense(&pencil.left);
    let r = dense(&pencil.right);
    let a = &l - &r * sigma;
    let w0 = a.lu().solve(&r).expect("oracle shift is not an eigenvalue");
    let n = w0.nrows();
    let mut w = w0.clone();
    let mut out = Vec::new();
    for c in 0..count {
        let mut x = unit(DVector::from_fn(n, |i, _| {
            Complex64::new(((i * 7 + c * 13) % 17) as f64 - 8.0, ((i * 3) % 5) as f64)
        }));
        let mut theta = Complex64::new(0.0, 0.0);
        for _ in 0..20_000 {
            let y = &w * &x;
            let next = x.dotc(&y);
            x = unit(y);
            if (next - theta).norm() <= tol * next.norm() {
                theta = next;
                break;
            }
            theta = next;
        }
        let (theta, x) = polish(&w, theta, x, tol);
        // back on the undeflated operator
        let (theta_full, _) = polish(&w0, theta, x.clone(), tol);
        out.push(sigma + theta_full.inv());
        w -= &x * x.adjoint() * theta;
    }
    out
}

/// Bessel function of the first kind, integer order, by its power series.
pub fn bessel_j(m: i32, x: f64) -> f64 {
    if m < 0 {
        let s = if m % 2 == 0 { 1.0 } else { -1.0 };
        return s * bessel_j(-m, x);
    }
    let half = x / 2.0;
    let mut term = half.powi(m) / (1..=m).map(f64::from).product::<f64>();
    let mut sum = term;
    for s in 1..200 {
        term *= -half * half / (f64::from(s) * f64::from(s + m));
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

pub fn bessel_j_prime(m: i32, x: f64) -> f64 {
    0.5 * (bessel_j(m - 1, x) - bessel_j(m + 1, x))
}

/// Determinant of the matching conditions for `w = J_m(k sqrt(n) r)` and
/// `v = J_m(k r)` at `r = radius`, divided by `k`.
pub fn disk_determinant(m: i32, k: f64, n: f64, radius: f64) -> f64 {
    let s = n.sqrt();
    s * bessel_j_prime(m, s * k * radius) * bessel_j(m, k * radius)
        - bessel_j(m, s * k * radius) * bessel_j_prime(m, k * radius)
}

/// Smallest real transmission eigenvalue of the disk in `[lo, hi]` over
/// orders `0..=max_order`, bracketed on a grid and bisected to `tol`.
pub fn disk_oracle(n: f64, radius: f64, lo: f64, hi: f64, max_order: i32, tol: f64) -> f64 {
    let mut best = f64::INFINITY;
    for m in 0..=max_order {
        let f = |k: f64| disk_determinant(m, k, n, radius);
        let steps = ((hi - lo) / 1e-3).ceil() as usize;
        for i in 0..steps {
            let (mut a, mut b) = (lo + i as f64 * 1e-3, lo + (i + 1) as f64 * 1e-3);
            if a >= best {
                break;
            }
            if f(a) * f(b) > 0.0 {
                continue;
            }
            while b - a > tol {
                let c = 0.5 * (a + b);
                if f(a) * f(c) <= 0.0 {
                    b = c;
                } else {
                    a = c;
                }
            }
            best = best.min(0.5 * (a + b));
            break;
        }
    }
    best
}
