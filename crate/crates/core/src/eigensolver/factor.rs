use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Lu;
use faer::sparse::linalg::LuError;
use faer::sparse::{SparseRowMatRef, SymbolicSparseRowMatRef};
use faer::MatMut;
use num_complex::Complex64;

use crate::assembly::{Blocks, Pencil};
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// Sparse LU factors of a square complex matrix.
pub struct LuFactor {
    lu: Lu<usize, Complex64>,
    n: usize,
}

impl std::fmt::Debug for LuFactor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "LuFactor(n = {})", self.n)
    }
}

pub fn factorize(m: &CsrMatrix<Complex64>) -> Result<LuFactor> {
    if m.nrows != m.ncols {
        return Err(Error::InvalidArgument(format!(
            "cannot factorize {}x{} matrix",
            m.nrows, m.ncols
        )));
    }
    let n = m.nrows;
    let symbolic = SymbolicSparseRowMatRef::new_checked(n, n, &m.row_ptr, None, &m.col_idx);
    let lu = SparseRowMatRef::new(symbolic, &m.values)
        .sp_lu()
        .map_err(|e| match e {
            LuError::SymbolicSingular { index } => Error::Singular { pivot: index },
            LuError::Generic(e) => Error::Factorization(format!("{e:?}")),
        })?;
    let factor = LuFactor { lu, n };
    // zero pivots only surface as non-finite solutions
    let mut probe: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(1.0 + (i % 7) as f64, 0.0))
        .collect();
    factor.solve_in_place(&mut probe)?;
    Ok(factor)
}

/// `L - sigma R`
pub fn shifted(pencil: &Pencil, sigma: Complex64) -> CsrMatrix<Complex64> {
    let l = pencil.left.map(|v| Complex64::new(v, 0.0));
    let r = pencil.right.map(|v| Complex64::new(v, 0.0));
    l.linear_combination(Complex64::new(1.0, 0.0), &r, -sigma)
}

/// `A - sigma B - sigma^2 C`
pub fn reduced(blocks: &Blocks, sigma: Complex64) -> CsrMatrix<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    let c = |m: &CsrMatrix<f64>| m.map(|v| Complex64::new(v, 0.0));
    c(&blocks.a)
        .linear_combination(one, &c(&blocks.b), -sigma)
        .linear_combination(one, &c(&blocks.c), -sigma * sigma)
}

impl LuFactor {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve_in_place(&self, rhs: &mut [Complex64]) -> Result<()> {
        assert_eq!(rhs.len(), self.n);
        self.lu
            .solve_in_place(MatMut::from_column_major_slice_mut(rhs, self.n, 1));
        match rhs
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            Some(i) => Err(Error::Singular { pivot: i }),
            None => Ok(()),
        }
    }

    pub fn solve(&self, rhs: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x)?;
        Ok(x)
    }
}
