//! Compressed sparse row storage.

use std::cmp::Ordering;
use std::fmt::{LowerExp, Write as _};
use std::ops::{Add, AddAssign, Mul};

use num_complex::Complex64;

/// Scalar stored in a [`CsrMatrix`].
pub trait Entry:
    Copy + Default + PartialEq + Add<Output = Self> + AddAssign + Mul<Output = Self> + Send + Sync
{
    /// Total order used to fix the summation order of duplicates.
    fn total_cmp(&self, other: &Self) -> Ordering;
    fn magnitude(&self) -> f64;
    fn from_real(x: f64) -> Self;
}

impl Entry for f64 {
    fn total_cmp(&self, other: &Self) -> Ordering {
        f64::total_cmp(self, other)
    }

    fn magnitude(&self) -> f64 {
        self.abs()
    }

    fn from_real(x: f64) -> Self {
        x
    }
}

impl Entry for Complex64 {
    fn total_cmp(&self, other: &Self) -> Ordering {
        self.re
            .total_cmp(&other.re)
            .then(self.im.total_cmp(&other.im))
    }

    fn magnitude(&self) -> f64 {
        self.norm()
    }

    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    pub nrows: usize,
    pub ncols: usize,
    pub row_ptr: Vec<usize>,
    /// Sorted and unique within each row.
    pub col_idx: Vec<usize>,
    pub values: Vec<T>,
}

impl<T: Entry> CsrMatrix<T> {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        CsrMatrix {
            nrows,
            ncols,
            row_ptr: vec![0; nrows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![T::from_real(1.0); n],
        }
    }

    /// Sums duplicate entries. Duplicates are added in ascending value order,
    /// so the result does not depend on the order of `triplets`.
    pub fn from_triplets(nrows: usize, ncols: usize, mut triplets: Vec<(usize, usize, T)>) -> Self {
        triplets.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)).then(a.2.total_cmp(&b.2)));
        let mut row_ptr = vec![0; nrows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<T> = Vec::with_capacity(triplets.len());
        let mut last = None;
        for (i, j, v) in triplets {
            assert!(i < nrows && j < ncols, "triplet ({i}, {j}) out of bounds");
            if last == Some((i, j)) {
                *values.last_mut().expect("entry exists") += v;
            } else {
                row_ptr[i + 1] += 1;
                col_idx.push(j);
                values.push(v);
                last = Some((i, j));
            }
        }
        for i in 0..nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()]
            .iter()
            .copied()
            .zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => T::default(),
        }
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.nrows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn transpose(&self) -> Self {
        CsrMatrix::from_triplets(
            self.ncols,
            self.nrows,
            self.triplets().map(|(i, j, v)| (j, i, v)).collect(),
        )
    }

    pub fn map<U: Entry>(&self, f: impl Fn(T) -> U) -> CsrMatrix<U> {
        CsrMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            row_ptr: self.row_ptr.clone(),
            col_idx: self.col_idx.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// `alpha * self + beta * other` on the union of both patterns.
    pub fn linear_combination(&self, alpha: T, other: &Self, beta: T) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut row_ptr = Vec::with_capacity(self.nrows + 1);
        let mut col_idx = Vec::with_capacity(self.nnz().max(other.nnz()));
        let mut values = Vec::with_capacity(col_idx.capacity());
        row_ptr.push(0);
        for i in 0..self.nrows {
            let mut a = self.row(i).peekable();
            let mut b = other.row(i).peekable();
            loop {
                let (j, v) = match (a.peek(), b.peek()) {
                    (None, None) => break,
                    (Some(&(ja, va)), Some(&(jb, vb))) if ja == jb => {
                        a.next();
                        b.next();
                        (ja, alpha * va + beta * vb)
                    }
                    (Some(&(ja, va)), Some(&(jb, _))) if ja < jb => {
                        a.next();
                        (ja, alpha * va)
                    }
                    (Some(&(ja, va)), None) => {
                        a.next();
                        (ja, alpha * va)
                    }
                    (_, Some(&(jb, vb))) => {
                        b.next();
                        (jb, beta * vb)
                    }
                };
                col_idx.push(j);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Assembles `[[b00, b01], [b10, b11]]`; `None` blocks are zero.
    pub fn block2x2(blocks: [[Option<&Self>; 2]; 2]) -> Self {
        let rows = |k: usize| blocks[k].iter().flatten().map(|m| m.nrows).next();
        let cols = |k: usize| blocks.iter().filter_map(|r| r[k]).map(|m| m.ncols).next();
        let missing = "each block row and column holds a matrix";
        let (r0, r1) = (rows(0).expect(missing), rows(1).expect(missing));
        let (c0, c1) = (cols(0).expect(missing), cols(1).expect(missing));
        let mut t = Vec::new();
        for (bi, row) in blocks.iter().enumerate() {
            for (bj, m) in row.iter().enumerate() {
                if let Some(m) = m {
                    let (oi, oj) = (bi * r0, bj * c0);
                    t.extend(m.triplets().map(|(i, j, v)| (i + oi, j + oj, v)));
                }
            }
        }
        CsrMatrix::from_triplets(r0 + r1, c0 + c1, t)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.magnitude()))
    }

    /// `max |A_ij - A_ji|`.
    pub fn symmetry_defect(&self) -> f64 {
        let diff =
            self.linear_combination(T::from_real(1.0), &self.transpose(), T::from_real(-1.0));
        diff.max_abs()
    }

    /// Dense row-major copy.
    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut out = vec![vec![T::default(); self.ncols]; self.nrows];
        for (i, j, v) in self.triplets() {
            out[i][j] = v;
        }
        out
    }
}

impl<T: Entry + LowerExp> CsrMatrix<T> {
    /// One `i j value` line per stored entry, zero based.
    pub fn to_coordinate_text(&self) -> String {
        let mut out = String::new();
        for (i, j, v) in self.triplets() {
            let _ = writeln!(out, "{i} {j} {v:e}");
        }
        out
    }
}

impl CsrMatrix<f64> {
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect()
    }

    pub fn mul_complex(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|i| {
                self.row(i)
                    .fold(Complex64::default(), |s, (j, v)| s + x[j] * v)
            })
            .collect()
    }
}

impl CsrMatrix<Complex64> {
    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|i| {
                self.row(i)
                    .fold(Complex64::default(), |s, (j, v)| s + x[j] * v)
            })
            .collect()
    }
}
