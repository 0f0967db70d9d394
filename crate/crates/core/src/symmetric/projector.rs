//! Two independent constructions of the symmetric projector `S_n`.
//!
//! * [`build_projector_permutation`] sums all `n!` permutation operators.
//!   Each permutation of `k` objects factors uniquely as a permutation of the
//!   first `k - 1` objects times either the identity or a transposition
//!   `(j k)`, so the sum is accumulated through the recursion
//!   `S_k = (S_{k-1} (x) 1)(1 + sum_j T_{j,k}) / k`, which visits every
//!   permutation exactly once without listing them.
//! * [`build_projector_occupation`] sums `|psi><psi|` over the normalized
//!   occupation-number basis of the symmetric subspace.

use crate::error::Result;

use super::sparse::SparseMatrix;
use super::{digits, enumerate_occupations, symmetric_dimension, tensor_dim};

#[derive(Debug, Clone)]
pub struct SymmetricProjector {
    local_dim: usize,
    copies: usize,
    matrix: SparseMatrix<f64>,
    dimension: u64,
}

impl SymmetricProjector {
    /// Wraps an arbitrary matrix without checking that it is a projector.
    /// Used to feed deliberately broken inputs to the verification suite.
    pub fn from_raw_parts(local_dim: usize, copies: usize, matrix: SparseMatrix<f64>) -> Result<Self> {
        let dimension = symmetric_dimension(local_dim as u64, copies as u64)?;
        Ok(Self {
            local_dim,
            copies,
            matrix,
            dimension,
        })
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn copies(&self) -> usize {
        self.copies
    }

    pub fn matrix(&self) -> &SparseMatrix<f64> {
        &self.matrix
    }

    /// `d_n`, from the binomial formula.
    pub fn dimension(&self) -> u64 {
        self.dimension
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    /// Same projector with every entry multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            matrix: self.matrix.scale(factor),
            ..self.clone()
        }
    }
}

/// Permutation operator exchanging tensor slots `a` and `b` (1-based).
pub fn transposition(d: usize, n: usize, a: usize, b: usize) -> SparseMatrix<f64> {
    let total = d.pow(n as u32);
    SparseMatrix::permutation(total, |c| {
        let mut word = digits(c, d, n);
        word.swap(a - 1, b - 1);
        word.iter().fold(0, |acc, &x| acc * d + x)
    })
}

/// Operator `P_pi` that moves the factor in slot `k` to slot `perm[k]`
/// (0-based permutation of `0..n`).
pub fn permutation_operator(d: usize, perm: &[usize]) -> SparseMatrix<f64> {
    let n = perm.len();
    let total = d.pow(n as u32);
    SparseMatrix::permutation(total, |c| {
        let word = digits(c, d, n);
        let mut moved = vec![0; n];
        for (k, &target) in perm.iter().enumerate() {
            moved[target] = word[k];
        }
        moved.iter().fold(0, |acc, &x| acc * d + x)
    })
}

/// `S_n = (1/n!) sum_pi P_pi`.
pub fn build_projector_permutation(d: usize, n: usize) -> Result<SymmetricProjector> {
    tensor_dim(d, n)?;
    let mut current = SparseMatrix::<f64>::identity(d.pow(n.min(1) as u32));
    for k in 2..=n {
        let lifted = current.kron_identity(d);
        let mut coset_sum = SparseMatrix::identity(d.pow(k as u32));
        for j in 1..k {
            coset_sum = coset_sum.add(&transposition(d, k, j, k));
        }
        current = lifted.mul(&coset_sum).scale(1.0 / k as f64);
    }
    SymmetricProjector::from_raw_parts(d, n, current)
}

/// Orthonormal occupation-number basis of the symmetric subspace as the
/// columns of a `d^n x d_n` isometry. Column `k` is the equal superposition
/// of the distinct product states carrying the `k`-th occupation vector.
pub fn symmetric_basis(d: usize, n: usize) -> Result<SparseMatrix<f64>> {
    let total = tensor_dim(d, n)?;
    let occupations = enumerate_occupations(d, n);
    let triplets = occupations
        .iter()
        .enumerate()
        .flat_map(|(col, occ)| {
            let states = occ.product_states();
            let amplitude = 1.0 / (states.len() as f64).sqrt();
            states.into_iter().map(move |row| (row, col, amplitude))
        })
        .collect();
    Ok(SparseMatrix::from_triplets(total, occupations.len(), triplets))
}

/// `S_n = sum_k |psi_k><psi_k|` over the occupation-number basis.
pub fn build_projector_occupation(d: usize, n: usize) -> Result<SymmetricProjector> {
    let basis = symmetric_basis(d, n)?;
    let matrix = basis.mul(&basis.adjoint());
    SymmetricProjector::from_raw_parts(d, n, matrix)
}
