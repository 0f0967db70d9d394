//! Exact machinery on the totally symmetric subspace of `(C^d)^{(x)n}`.
//!
//! Tensor basis states `|i_1 i_2 ... i_n>` are indexed with the first slot
//! most significant, matching the Kronecker product convention
//! `A (x) B`. Everything in this module is deterministic.

pub mod checks;
pub mod lemma;
pub mod moments;
pub mod operators;
pub mod projector;
pub mod sparse;

pub use checks::CheckReport;
pub use lemma::{check_unbiased_lemma, LemmaReport};
pub use moments::haar_average_tensor_power;
pub use operators::{embed_one_body, omega_hat, omega_hat_av, partial_trace_last, product_basis_diagonal};
pub use projector::{build_projector_occupation, build_projector_permutation, symmetric_basis, SymmetricProjector};
pub use sparse::SparseMatrix;

use crate::error::{Error, Result};

/// Largest tensor-space dimension `d^n` the exact oracle will build.
pub const MAX_TENSOR_DIM: usize = 4096;

/// Returns `d^n`, or a resource-guard error when it exceeds
/// [`MAX_TENSOR_DIM`].
pub fn tensor_dim(d: usize, n: usize) -> Result<usize> {
    let guard = Error::ResourceGuard {
        dim: d,
        copies: n,
        limit: MAX_TENSOR_DIM,
    };
    match u32::try_from(n).ok().and_then(|n| d.checked_pow(n)) {
        Some(total) if total <= MAX_TENSOR_DIM => Ok(total),
        _ => Err(guard),
    }
}

/// `d_n = C(n + d - 1, d - 1)`, the dimension of the symmetric subspace.
pub fn symmetric_dimension(d: u64, n: u64) -> Result<u64> {
    if d == 0 {
        return Err(Error::DimensionTooSmall { dim: 0, min: 1 });
    }
    let top = n.checked_add(d - 1).ok_or(Error::Overflow { n, k: d - 1 })?;
    binomial(top, d - 1)
}

fn binomial(n: u64, k: u64) -> Result<u64> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) at every step.
        acc = acc * u128::from(n - i) / u128::from(i + 1);
        if acc > u128::from(u64::MAX) {
            return Err(Error::Overflow { n, k });
        }
    }
    Ok(acc as u64)
}

/// Occupation numbers `(n_1, ..., n_d)` of a symmetric basis state.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OccupationIndex {
    counts: Vec<usize>,
}

impl OccupationIndex {
    pub fn new(counts: Vec<usize>) -> Self {
        Self { counts }
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Sorted word `0^{n_1} 1^{n_2} ...` of single-system labels.
    fn word(&self) -> Vec<usize> {
        self.counts
            .iter()
            .enumerate()
            .flat_map(|(label, &count)| std::iter::repeat_n(label, count))
            .collect()
    }

    /// Tensor indices of all distinct product states with these
    /// occupations, in increasing order.
    pub fn product_states(&self) -> Vec<usize> {
        let d = self.counts.len();
        let mut word = self.word();
        let mut out = Vec::new();
        loop {
            out.push(word.iter().fold(0, |acc, &digit| acc * d + digit));
            if !next_permutation(&mut word) {
                break;
            }
        }
        out
    }
}

/// Every occupation vector for `n` bosons in `d` modes, starting from
/// `(n, 0, ..., 0)` and ending at `(0, ..., 0, n)`.
pub fn enumerate_occupations(d: usize, n: usize) -> Vec<OccupationIndex> {
    fn fill(prefix: &mut Vec<usize>, remaining: usize, slots: usize, out: &mut Vec<OccupationIndex>) {
        if slots == 1 {
            prefix.push(remaining);
            out.push(OccupationIndex::new(prefix.clone()));
            prefix.pop();
            return;
        }
        for k in (0..=remaining).rev() {
            prefix.push(k);
            fill(prefix, remaining - k, slots - 1, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if d > 0 {
        fill(&mut Vec::with_capacity(d), n, d, &mut out);
    }
    out
}

/// Lexicographic successor; returns false after the last permutation.
fn next_permutation(word: &mut [usize]) -> bool {
    let Some(i) = word.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = word.iter().rposition(|&x| x > word[i]).expect("pivot has a successor");
    word.swap(i, j);
    word[i + 1..].reverse();
    true
}

/// Digits `(i_1, ..., i_n)` of tensor index `index`.
pub fn digits(index: usize, d: usize, n: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    let mut rest = index;
    for slot in (0..n).rev() {
        out[slot] = rest % d;
        rest /= d;
    }
    out
}

/// Stride of 1-based tensor slot `position` among `copies` slots.
pub(crate) fn slot_stride(d: usize, position: usize, copies: usize) -> usize {
    d.pow((copies - position) as u32)
}
