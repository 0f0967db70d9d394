use std::collections::HashMap;
use std::str::FromStr;

use crate::ensemble::{derive_stream_in, domain, sample_hermitian};
use crate::error::{Error, Result};
use crate::hermitian::Observable;
use crate::symmetric::checks::{
    check_completed_square, check_idempotence, check_partial_trace, check_positivity, check_projector_equivalence,
    check_self_adjoint, check_trace, check_trace_formulas, check_transpositions, lemma_checks, CheckReport,
};
use crate::symmetric::{
    build_projector_occupation, build_projector_permutation, check_unbiased_lemma, symmetric_basis, SymmetricProjector,
    MAX_TENSOR_DIM,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyLevel {
    /// Qubits, `n <= 3`.
    Fast,
    /// `2 <= d <= 8`, every `n` with `d^n <= 4096`.
    Full,
}

impl FromStr for VerifyLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fast" => Ok(Self::Fast),
            "full" => Ok(Self::Full),
            other => Err(Error::Config(format!("unknown verify level `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct VerifyOptions {
    /// Test hook: replaces `S_n` by `(d_n + 1)/d_n * S_n` in every check that
    /// consumes the permutation-sum projector.
    pub tamper_projector: bool,
}

/// Largest `D = d^n` for which the dense-spectrum positivity sweep runs.
const POSITIVITY_MAX_DIM: usize = 256;
const LEMMA_TRIALS: usize = 50;

pub fn verify_grid(level: VerifyLevel) -> Vec<(usize, usize)> {
    match level {
        VerifyLevel::Fast => (1..=3).map(|n| (2, n)).collect(),
        VerifyLevel::Full => (2..=8usize)
            .flat_map(|d| {
                (1..)
                    .take_while(move |&n| d.pow(n as u32) <= MAX_TENSOR_DIM)
                    .map(move |n| (d, n))
            })
            .collect(),
    }
}

struct Projectors {
    cache: HashMap<(usize, usize), SymmetricProjector>,
    tamper: bool,
}

impl Projectors {
    fn get(&mut self, d: usize, n: usize) -> Result<SymmetricProjector> {
        if let Some(p) = self.cache.get(&(d, n)) {
            return Ok(p.clone());
        }
        let mut p = build_projector_permutation(d, n)?;
        if self.tamper {
            let dn = p.dimension() as f64;
            p = p.scaled((dn + 1.0) / dn);
        }
        self.cache.insert((d, n), p.clone());
        Ok(p)
    }
}

fn cell_observables(seed: u64, d: usize, n: usize, count: usize) -> Result<Vec<Observable>> {
    (0..count)
        .map(|k| {
            let index = ((d * 64 + n) * 16 + k) as u64;
            sample_hermitian(d, &mut derive_stream_in(seed, domain::VERIFY, index))
        })
        .collect()
}

/// Runs every symmetric-subspace check over the grid for `level`.
pub fn run_verify(level: VerifyLevel, seed: u64, options: VerifyOptions) -> Result<Vec<CheckReport>> {
    let mut projectors = Projectors {
        cache: HashMap::new(),
        tamper: options.tamper_projector,
    };
    let mut reports = Vec::new();
    for (d, n) in verify_grid(level) {
        let total = d.pow(n as u32);
        let observables = cell_observables(seed, d, n, if total <= POSITIVITY_MAX_DIM { 2 } else { 1 })?;
        let s = projectors.get(d, n)?;
        let occupation = build_projector_occupation(d, n)?;
        reports.push(check_projector_equivalence(&s, &occupation));
        reports.push(check_idempotence(&s));
        reports.push(check_trace(&s));
        reports.push(check_self_adjoint(&s));
        reports.push(check_transpositions(&s));
        reports.extend(check_trace_formulas(&s, &observables)?);

        if total * d <= MAX_TENSOR_DIM {
            let next = projectors.get(d, n + 1)?;
            let pair = projectors.get(d, 2)?;
            reports.push(check_partial_trace(&next, &s, &observables)?);
            reports.extend(check_completed_square(&s, &next, &pair, &observables)?);
        }
        if total <= POSITIVITY_MAX_DIM {
            reports.push(check_positivity(&symmetric_basis(d, n)?, d, n, &observables)?);
        }
        let index = (d * 64 + n) as u64;
        let lemma = check_unbiased_lemma(d, n, LEMMA_TRIALS, &mut derive_stream_in(seed, domain::VERIFY, index))?;
        reports.extend(lemma_checks(&lemma));
    }
    Ok(reports)
}
