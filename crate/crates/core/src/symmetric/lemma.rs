//! Numerical check of the unbiasedness lemma: `tr[A rho^{(x)N}] = 0` for
//! every pure `rho` exactly when `S_N A S_N = 0`.
//!
//! All projected quantities are evaluated through the isometry `P` whose
//! columns are the occupation-number basis, using `S_N = P P^dagger`, so
//! `S_N X S_N = 0` iff `P^dagger X P = 0`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::ensemble::{sample_haar_pure, sample_hermitian, RngStream};
use crate::error::Result;

use super::moments::tensor_power;
use super::operators::{omega_hat_av, to_product_basis};
use super::projector::symmetric_basis;
use super::sparse::SparseMatrix;
use super::{digits, tensor_dim};

#[derive(Debug, Clone, Serialize)]
pub struct LemmaReport {
    pub local_dim: usize,
    pub copies: usize,
    pub trials: usize,
    /// max over sampled pure states of `|tr[A rho^{(x)N}]|` with
    /// `A = B - S_N B S_N`.
    pub forward_max_deviation: f64,
    /// max entry of `S_N A S_N`, which must vanish by construction.
    pub premise_deviation: f64,
    /// max entry of `S_N (sum_a omega_a E_a - Omega_av) S_N` for the product
    /// eigenprojectors `E_a` and sample-average estimates `omega_a`.
    pub ub_pure_deviation: f64,
    /// max over sampled states of `|tr[S_N rho^{(x)N}] - 1|` (negative
    /// control: `A = S_N` is not annihilated).
    pub negative_control_deviation: f64,
}

/// Random sparse Hermitian matrix with a few off-diagonal entries per column.
fn random_sparse_hermitian(total: usize, per_col: usize, stream: &mut RngStream) -> SparseMatrix<Complex64> {
    let mut triplets = Vec::with_capacity(total * (2 * per_col + 1));
    for c in 0..total {
        triplets.push((c, c, Complex64::new(stream.normal(), 0.0)));
        for _ in 0..per_col.min(total) {
            let r = (stream.uniform() * total as f64) as usize % total;
            let v = stream.complex_normal() * 0.5;
            triplets.push((r, c, v));
            triplets.push((c, r, v.conj()));
        }
    }
    SparseMatrix::from_triplets(total, total, triplets)
}

fn quadratic_form(m: &SparseMatrix<Complex64>, x: &DVector<Complex64>) -> Complex64 {
    let y = m.mul_vec(x.as_slice());
    x.iter().zip(&y).map(|(a, b)| a.conj() * b).sum()
}

fn max_entry(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn check_unbiased_lemma(d: usize, copies: usize, trials: usize, stream: &mut RngStream) -> Result<LemmaReport> {
    let total = tensor_dim(d, copies)?;
    let basis = symmetric_basis(d, copies)?.to_complex();
    let basis_adj = basis.adjoint();

    // Forward direction: A = B - P (P^dagger B P) P^dagger.
    let b = random_sparse_hermitian(total, 4, stream);
    let compressed = basis_adj.mul(&b.mul(&basis)).to_dense();
    let gram = basis_adj.mul(&basis).to_dense();
    let premise = &compressed - &gram * &compressed * &gram;

    let mut forward = 0.0f64;
    let mut control = 0.0f64;
    for _ in 0..trials {
        let phi = tensor_power(&sample_haar_pure(d, stream), copies);
        let projected = DVector::from_vec(basis_adj.mul_vec(phi.as_slice()));
        let sbs = (projected.adjoint() * &compressed * &projected)[(0, 0)];
        let trace_a = quadratic_form(&b, &phi) - sbs;
        forward = forward.max(trace_a.norm());
        control = control.max((projected.norm_squared() - 1.0).abs());
    }

    // Converse instance: sample-average POVM on the product eigenbasis.
    let obs = sample_hermitian(d, stream)?;
    let rotated = to_product_basis(&basis.to_dense(), obs.eigenvectors(), copies);
    let estimates: Vec<f64> = (0..total)
        .map(|a| digits(a, d, copies).iter().map(|&i| obs.eigenvalues()[i]).sum::<f64>() / copies as f64)
        .collect();
    let weighted = DMatrix::from_fn(total, rotated.ncols(), |a, k| rotated[(a, k)] * estimates[a]);
    let povm_part = rotated.adjoint() * weighted;
    let average_part = basis_adj.mul(&omega_hat_av(&obs, copies)?.mul(&basis)).to_dense();

    Ok(LemmaReport {
        local_dim: d,
        copies,
        trials,
        forward_max_deviation: forward,
        premise_deviation: max_entry(&premise),
        ub_pure_deviation: max_entry(&(povm_part - average_part)),
        negative_control_deviation: control,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::derive_stream;

    #[test]
    fn qubit_pair_lemma() {
        let r = check_unbiased_lemma(2, 2, 1000, &mut derive_stream(11, 0)).unwrap();
        assert!(r.forward_max_deviation < 1e-10, "{r:?}");
        assert!(r.premise_deviation < 1e-12, "{r:?}");
        assert!(r.negative_control_deviation < 1e-12, "{r:?}");
    }

    #[test]
    fn sample_average_povm_is_unbiased_on_symmetric_subspace() {
        let r = check_unbiased_lemma(2, 3, 10, &mut derive_stream(11, 1)).unwrap();
        assert!(r.ub_pure_deviation < 1e-12, "{r:?}");
    }

    #[test]
    fn random_operator_is_not_annihilated() {
        // Without the subtraction tr[B rho^{(x)N}] is generically nonzero,
        // so a vanishing forward deviation is not vacuous.
        let mut s = derive_stream(11, 2);
        let b = random_sparse_hermitian(8, 4, &mut s);
        let phi = tensor_power(&sample_haar_pure(2, &mut s), 3);
        assert!(quadratic_form(&b, &phi).norm() > 1e-3);
    }
}
