//! Minimal compressed-sparse-column matrices for the tensor-power oracle.
//!
//! Symmetric projectors on `(C^d)^{(x)n}` are block-sparse, and one-body
//! operators have only `d` nonzeros per column, so dense storage would
//! dominate both memory and time once `d^n` reaches a few thousand.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

pub trait Entry:
    nalgebra::Scalar
    + Copy
    + PartialEq
    + Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + AddAssign
{
    fn zero() -> Self;
    fn one() -> Self;
    fn conj(self) -> Self;
    fn modulus(self) -> f64;
    fn from_real(x: f64) -> Self;
}

impl Entry for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn conj(self) -> Self {
        self
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn from_real(x: f64) -> Self {
        x
    }
}

impl Entry for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix<T> {
    nrows: usize,
    ncols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Entry> SparseMatrix<T> {
    /// Builds from `(row, col, value)` triplets; duplicates are summed and
    /// exact zeros dropped.
    pub fn from_triplets(nrows: usize, ncols: usize, mut triplets: Vec<(usize, usize, T)>) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (c, r));
        let mut col_ptr = vec![0; ncols + 1];
        let mut row_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<T> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) out of bounds");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                row_idx.push(r);
                values.push(v);
                col_ptr[c + 1] += 1;
                last = Some((r, c));
            }
        }
        for c in 0..ncols {
            col_ptr[c + 1] += col_ptr[c];
        }
        let mut m = Self {
            nrows,
            ncols,
            col_ptr,
            row_idx,
            values,
        };
        m.prune_zeros();
        m
    }

    fn from_columns(nrows: usize, columns: Vec<Vec<(usize, T)>>) -> Self {
        let ncols = columns.len();
        let mut col_ptr = Vec::with_capacity(ncols + 1);
        col_ptr.push(0);
        let nnz = columns.iter().map(Vec::len).sum();
        let mut row_idx = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        for col in columns {
            for (r, v) in col {
                if v != T::zero() {
                    row_idx.push(r);
                    values.push(v);
                }
            }
            col_ptr.push(row_idx.len());
        }
        Self {
            nrows,
            ncols,
            col_ptr,
            row_idx,
            values,
        }
    }

    fn prune_zeros(&mut self) {
        if self.values.iter().all(|&v| v != T::zero()) {
            return;
        }
        let columns = (0..self.ncols)
            .map(|c| {
                let (rows, vals) = self.col(c);
                rows.iter().copied().zip(vals.iter().copied()).collect()
            })
            .collect();
        *self = Self::from_columns(self.nrows, columns);
    }

    pub fn identity(n: usize) -> Self {
        Self::permutation(n, |c| c)
    }

    /// Permutation matrix sending basis vector `|c>` to `|image(c)>`.
    pub fn permutation(n: usize, image: impl Fn(usize) -> usize) -> Self {
        let columns = (0..n).map(|c| vec![(image(c), T::one())]).collect();
        Self::from_columns(n, columns)
    }

    pub fn from_dense(dense: &DMatrix<T>) -> Self {
        let columns = (0..dense.ncols())
            .map(|c| {
                (0..dense.nrows())
                    .filter(|&r| dense[(r, c)] != T::zero())
                    .map(|r| (r, dense[(r, c)]))
                    .collect()
            })
            .collect();
        Self::from_columns(dense.nrows(), columns)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Row indices (ascending) and values of column `c`.
    pub fn col(&self, c: usize) -> (&[usize], &[T]) {
        let span = self.col_ptr[c]..self.col_ptr[c + 1];
        (&self.row_idx[span.clone()], &self.values[span])
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        let (rows, vals) = self.col(c);
        match rows.binary_search(&r) {
            Ok(k) => vals[k],
            Err(_) => T::zero(),
        }
    }

    /// `(row, col, value)` for every stored entry, column by column.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.ncols).flat_map(move |c| {
            let (rows, vals) = self.col(c);
            rows.iter().zip(vals).map(move |(&r, &v)| (r, c, v))
        })
    }

    pub fn to_dense(&self) -> DMatrix<T> {
        let mut dense = DMatrix::from_element(self.nrows, self.ncols, T::zero());
        for (r, c, v) in self.iter() {
            dense[(r, c)] = v;
        }
        dense
    }

    pub fn map<U: Entry>(&self, f: impl Fn(T) -> U) -> SparseMatrix<U> {
        let mut out = SparseMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            col_ptr: self.col_ptr.clone(),
            row_idx: self.row_idx.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        };
        out.prune_zeros();
        out
    }

    pub fn scale(&self, factor: T) -> Self {
        self.map(|v| v * factor)
    }

    pub fn adjoint(&self) -> Self {
        let triplets = self.iter().map(|(r, c, v)| (c, r, v.conj())).collect();
        Self::from_triplets(self.ncols, self.nrows, triplets)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let triplets = self.iter().chain(other.iter()).collect();
        Self::from_triplets(self.nrows, self.ncols, triplets)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.map(|v| -v))
    }

    /// Sparse product `self * other` (Gustavson's algorithm).
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.ncols, other.nrows, "inner dimensions differ");
        let mut acc = vec![T::zero(); self.nrows];
        let mut marker = vec![usize::MAX; self.nrows];
        let mut touched = Vec::new();
        let columns = (0..other.ncols)
            .map(|j| {
                touched.clear();
                let (krows, kvals) = other.col(j);
                for (&k, &b) in krows.iter().zip(kvals) {
                    let (irows, ivals) = self.col(k);
                    for (&i, &a) in irows.iter().zip(ivals) {
                        if marker[i] != j {
                            marker[i] = j;
                            acc[i] = T::zero();
                            touched.push(i);
                        }
                        acc[i] += a * b;
                    }
                }
                touched.sort_unstable();
                touched.iter().map(|&i| (i, acc[i])).collect()
            })
            .collect();
        Self::from_columns(self.nrows, columns)
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.ncols);
        let mut y = vec![T::zero(); self.nrows];
        for (r, c, v) in self.iter() {
            y[r] += v * x[c];
        }
        y
    }

    /// Sparse times dense.
    pub fn mul_dense(&self, x: &DMatrix<T>) -> DMatrix<T> {
        assert_eq!(x.nrows(), self.ncols);
        let mut y = DMatrix::from_element(self.nrows, x.ncols(), T::zero());
        for j in 0..x.ncols() {
            for (r, c, v) in self.iter() {
                y[(r, j)] += v * x[(c, j)];
            }
        }
        y
    }

    /// `A (x) 1_d`.
    pub fn kron_identity(&self, d: usize) -> Self {
        let triplets = self
            .iter()
            .flat_map(|(r, c, v)| (0..d).map(move |k| (r * d + k, c * d + k, v)))
            .collect();
        Self::from_triplets(self.nrows * d, self.ncols * d, triplets)
    }

    pub fn trace(&self) -> T {
        let mut t = T::zero();
        for c in 0..self.ncols.min(self.nrows) {
            t += self.get(c, c);
        }
        t
    }

    /// `tr[self * other]` without forming the product.
    pub fn trace_product(&self, other: &Self) -> T {
        assert_eq!((self.nrows, self.ncols), (other.ncols, other.nrows));
        let mut t = T::zero();
        if self.nnz() <= other.nnz() {
            for (i, j, a) in self.iter() {
                t += a * other.get(j, i);
            }
        } else {
            for (j, i, b) in other.iter() {
                t += self.get(i, j) * b;
            }
        }
        t
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.sub(other).values.iter().map(|v| v.modulus()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v.modulus().powi(2)).sum::<f64>().sqrt()
    }

    pub fn frobenius_diff(&self, other: &Self) -> f64 {
        self.sub(other).frobenius_norm()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.modulus()).fold(0.0, f64::max)
    }
}

impl SparseMatrix<f64> {
    pub fn to_complex(&self) -> SparseMatrix<Complex64> {
        self.map(|x| Complex64::new(x, 0.0))
    }
}
