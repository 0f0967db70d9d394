//! One-body operators on tensor powers and related contractions.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hermitian::Observable;

use super::sparse::{Entry, SparseMatrix};
use super::{slot_stride, tensor_dim};

/// `A(n) = 1^{(x)(n-1)} (x) A (x) 1^{(x)(N-n)}` for a `d x d` matrix `A`,
/// with 1-based `position`.
pub fn embed_local(op: &DMatrix<Complex64>, position: usize, copies: usize) -> Result<SparseMatrix<Complex64>> {
    let d = op.nrows();
    let total = tensor_dim(d, copies)?;
    if position == 0 || position > copies {
        return Err(Error::PositionOutOfRange { position, copies });
    }
    let stride = slot_stride(d, position, copies);
    let mut triplets = Vec::with_capacity(total * d);
    for c in 0..total {
        let j = (c / stride) % d;
        for i in 0..d {
            let v = op[(i, j)];
            if v != Complex64::new(0.0, 0.0) {
                let r = c - j * stride + i * stride;
                triplets.push((r, c, v));
            }
        }
    }
    Ok(SparseMatrix::from_triplets(total, total, triplets))
}

/// `Omega(n)`: the observable acting on tensor slot `position` of `copies`.
pub fn embed_one_body(obs: &Observable, position: usize, copies: usize) -> Result<SparseMatrix<Complex64>> {
    embed_local(obs.matrix(), position, copies)
}

fn one_body_sum(obs: &Observable, copies: usize) -> Result<SparseMatrix<Complex64>> {
    let total = tensor_dim(obs.dim(), copies)?;
    let mut sum = SparseMatrix::from_triplets(total, total, Vec::new());
    for position in 1..=copies {
        sum = sum.add(&embed_one_body(obs, position, copies)?);
    }
    Ok(sum)
}

/// `(tr Omega + sum_n Omega(n)) / (N + d)`.
pub fn omega_hat(obs: &Observable, copies: usize) -> Result<SparseMatrix<Complex64>> {
    let total = tensor_dim(obs.dim(), copies)?;
    let shift = SparseMatrix::identity(total).scale(Complex64::from_real(obs.trace()));
    let scale = 1.0 / (copies + obs.dim()) as f64;
    Ok(one_body_sum(obs, copies)?
        .add(&shift)
        .scale(Complex64::from_real(scale)))
}

/// `(1/N) sum_n Omega(n)`.
pub fn omega_hat_av(obs: &Observable, copies: usize) -> Result<SparseMatrix<Complex64>> {
    if copies == 0 {
        return Err(Error::NoCopies);
    }
    Ok(one_body_sum(obs, copies)?.scale(Complex64::from_real(1.0 / copies as f64)))
}

/// Traces out the last of `copies` tensor factors.
pub fn partial_trace_last<T: Entry>(matrix: &SparseMatrix<T>, d: usize, copies: usize) -> Result<SparseMatrix<T>> {
    let total = tensor_dim(d, copies)?;
    if copies == 0 {
        return Err(Error::NoCopies);
    }
    if matrix.nrows() != total || matrix.ncols() != total {
        return Err(Error::DimensionMismatch {
            expected: total,
            found: matrix.nrows().max(matrix.ncols()),
        });
    }
    let triplets = matrix
        .iter()
        .filter(|&(r, c, _)| r % d == c % d)
        .map(|(r, c, v)| (r / d, c / d, v))
        .collect();
    Ok(SparseMatrix::from_triplets(total / d, total / d, triplets))
}

/// `X <- (1 (x) V^dagger (x) 1) X` on tensor slot `position`.
pub(crate) fn rotate_rows_adjoint(x: &mut DMatrix<Complex64>, v: &DMatrix<Complex64>, position: usize, copies: usize) {
    let d = v.nrows();
    let stride = slot_stride(d, position, copies);
    let v_adj = v.adjoint();
    let mut gathered = vec![Complex64::new(0.0, 0.0); d];
    for c in 0..x.ncols() {
        for base in (0..x.nrows()).filter(|b| (b / stride).is_multiple_of(d)) {
            for (j, g) in gathered.iter_mut().enumerate() {
                *g = x[(base + j * stride, c)];
            }
            for i in 0..d {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, g) in gathered.iter().enumerate() {
                    acc += v_adj[(i, j)] * g;
                }
                x[(base + i * stride, c)] = acc;
            }
        }
    }
}

/// `X <- X (1 (x) V (x) 1)` on tensor slot `position`.
pub(crate) fn rotate_cols(x: &mut DMatrix<Complex64>, v: &DMatrix<Complex64>, position: usize, copies: usize) {
    let d = v.nrows();
    let stride = slot_stride(d, position, copies);
    let mut gathered = vec![Complex64::new(0.0, 0.0); d];
    for base in (0..x.ncols()).filter(|b| (b / stride).is_multiple_of(d)) {
        for r in 0..x.nrows() {
            for (j, g) in gathered.iter_mut().enumerate() {
                *g = x[(r, base + j * stride)];
            }
            for i in 0..d {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, g) in gathered.iter().enumerate() {
                    acc += g * v[(j, i)];
                }
                x[(r, base + i * stride)] = acc;
            }
        }
    }
}

/// `(V^{(x)N})^dagger X` for a `d^N x k` dense block.
pub fn to_product_basis(x: &DMatrix<Complex64>, v: &DMatrix<Complex64>, copies: usize) -> DMatrix<Complex64> {
    let mut y = x.clone();
    for position in 1..=copies {
        rotate_rows_adjoint(&mut y, v, position, copies);
    }
    y
}

/// Diagonal of `U^dagger X U` with `U = V^{(x)N}`: entry `a` is
/// `<a|X|a>` for the product state `|a> = v_{a_1} (x) ... (x) v_{a_N}`.
pub fn product_basis_diagonal(
    x: &SparseMatrix<Complex64>,
    v: &DMatrix<Complex64>,
    copies: usize,
) -> Result<Vec<Complex64>> {
    let total = tensor_dim(v.nrows(), copies)?;
    if x.nrows() != total || x.ncols() != total {
        return Err(Error::DimensionMismatch {
            expected: total,
            found: x.nrows(),
        });
    }
    let mut y = to_product_basis(&x.to_dense(), v, copies);
    for position in 1..=copies {
        rotate_cols(&mut y, v, position, copies);
    }
    Ok((0..total).map(|a| y[(a, a)]).collect())
}
