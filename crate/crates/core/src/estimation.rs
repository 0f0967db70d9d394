//! Simulated projective measurements, the two estimators, and the
//! closed-form error and bias expressions.
//!
//! The optimal estimate after observing eigenvalues `Omega_{i_1} .. Omega_{i_N}`
//! is the plain average of those N values together with all d eigenvalues of
//! the observable:
//!
//! ```text
//! omega_opt = (tr Omega + sum_n Omega_{i_n}) / (N + d)
//! ```
//!
//! Averaged over Haar-random pure states its mean squared error is
//! `(d tr Omega^2 - (tr Omega)^2) / (d (d+1) (N+d))`, against
//! `... / (d (d+1) N)` for the sample average.

use serde::{Deserialize, Serialize};

use crate::ensemble::RngStream;
use crate::error::{Error, Result};
use crate::hermitian::{expectation, outcome_distribution, Observable, PureState};

/// Eigen-indices observed in N projective measurements, with the matching
/// eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeSequence {
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl OutcomeSequence {
    pub fn from_indices(indices: Vec<usize>, obs: &Observable) -> Result<Self> {
        let spectrum = obs.eigenvalues();
        let values = indices
            .iter()
            .map(|&i| {
                spectrum.get(i).copied().ok_or(Error::OutcomeOutOfRange {
                    index: i,
                    dim: obs.dim(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { indices, values })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    SampleAverage,
    OptimalPure,
    /// Optimal single-copy qubit estimator for an isotropic ensemble with
    /// second moment `n2 = <n^2>`.
    OptimalMixedQubit {
        n2: f64,
    },
}

impl EstimatorKind {
    pub fn label(&self) -> &'static str {
        match self {
            EstimatorKind::SampleAverage => "sample-average",
            EstimatorKind::OptimalPure => "optimal-pure",
            EstimatorKind::OptimalMixedQubit { .. } => "optimal-mixed-qubit",
        }
    }

    pub fn n2(&self) -> Option<f64> {
        match *self {
            EstimatorKind::OptimalMixedQubit { n2 } => Some(n2),
            _ => None,
        }
    }

    pub fn validate(&self, dim: usize, copies: usize) -> Result<()> {
        if copies == 0 {
            return Err(Error::NoCopies);
        }
        if let EstimatorKind::OptimalMixedQubit { n2 } = *self {
            check_n2(n2)?;
            if dim != 2 {
                return Err(Error::RequiresQubit { dim });
            }
            if copies != 1 {
                return Err(Error::RequiresSingleCopy { copies });
            }
        }
        Ok(())
    }

    pub fn estimate(&self, outcomes: &OutcomeSequence, obs: &Observable) -> Result<f64> {
        match *self {
            EstimatorKind::SampleAverage => estimate_sample_average(outcomes),
            EstimatorKind::OptimalPure => estimate_optimal(outcomes, obs),
            EstimatorKind::OptimalMixedQubit { n2 } => estimate_optimal_mixed_qubit(outcomes, obs, n2),
        }
    }

    /// Every estimator here is `offset + slope * (sample mean)`; returns
    /// `(offset, slope)` for N copies of `obs`.
    pub fn affine_coefficients(&self, obs: &Observable, copies: usize) -> (f64, f64) {
        let n = copies as f64;
        let d = obs.dim() as f64;
        match *self {
            EstimatorKind::SampleAverage => (0.0, 1.0),
            EstimatorKind::OptimalPure => (obs.trace() / (n + d), n / (n + d)),
            EstimatorKind::OptimalMixedQubit { n2 } => ((3.0 - n2) / 6.0 * obs.trace(), n2 / 3.0),
        }
    }

    /// Exact mean of the estimator at a fixed state whose expectation value
    /// is `true_value`.
    pub fn conditional_mean(&self, obs: &Observable, copies: usize, true_value: f64) -> f64 {
        let (offset, slope) = self.affine_coefficients(obs, copies);
        offset + slope * true_value
    }
}

fn check_n2(n2: f64) -> Result<()> {
    if (0.0..=1.0).contains(&n2) {
        Ok(())
    } else {
        Err(Error::SecondMomentOutOfRange(n2))
    }
}

fn check_copies(copies: usize) -> Result<()> {
    if copies == 0 {
        Err(Error::NoCopies)
    } else {
        Ok(())
    }
}

/// Draws `copies` independent outcomes from `probs` (inverse CDF).
pub fn simulate_from_distribution(
    probs: &[f64],
    obs: &Observable,
    copies: usize,
    stream: &mut RngStream,
) -> Result<OutcomeSequence> {
    check_copies(copies)?;
    if probs.len() != obs.dim() {
        return Err(Error::DimensionMismatch {
            expected: obs.dim(),
            found: probs.len(),
        });
    }
    // Rounding can leave the total slightly below 1; fall back to the last
    // outcome that has any weight.
    let fallback = probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1);
    let indices = (0..copies)
        .map(|_| {
            let u = stream.uniform();
            let mut cumulative = 0.0;
            probs
                .iter()
                .position(|&p| {
                    cumulative += p;
                    u < cumulative
                })
                .unwrap_or(fallback)
        })
        .collect();
    OutcomeSequence::from_indices(indices, obs)
}

/// N independent projective measurements of `obs` on copies of `state`.
pub fn simulate_measurements(
    state: &PureState,
    obs: &Observable,
    copies: usize,
    stream: &mut RngStream,
) -> Result<OutcomeSequence> {
    let probs = outcome_distribution(state, obs)?;
    simulate_from_distribution(&probs, obs, copies, stream)
}

/// omega_av: arithmetic mean of the observed eigenvalues.
pub fn estimate_sample_average(outcomes: &OutcomeSequence) -> Result<f64> {
    if outcomes.is_empty() {
        return Err(Error::EmptyOutcomes);
    }
    Ok(outcomes.values().iter().sum::<f64>() / outcomes.len() as f64)
}

/// omega_opt: mean of the observed eigenvalues and all d eigenvalues.
pub fn estimate_optimal(outcomes: &OutcomeSequence, obs: &Observable) -> Result<f64> {
    if outcomes.is_empty() {
        return Err(Error::EmptyOutcomes);
    }
    let observed: f64 = outcomes.values().iter().sum();
    Ok((obs.trace() + observed) / (outcomes.len() + obs.dim()) as f64)
}

/// Single-copy qubit estimate `((3 - n2)/2 tr Omega + n2 Omega_{i_1}) / 3`.
pub fn estimate_optimal_mixed_qubit(outcomes: &OutcomeSequence, obs: &Observable, n2: f64) -> Result<f64> {
    EstimatorKind::OptimalMixedQubit { n2 }.validate(obs.dim(), outcomes.len().max(1))?;
    if outcomes.is_empty() {
        return Err(Error::EmptyOutcomes);
    }
    let prior = obs.trace() / 2.0 * ((3.0 - n2) / 3.0);
    Ok(prior + n2 / 3.0 * outcomes.values()[0])
}

/// `d tr Omega^2 - (tr Omega)^2`, evaluated as `sum_{i<j} (Omega_i - Omega_j)^2`
/// so that it is exactly zero for multiples of the identity and never
/// negative.
pub fn spectral_spread(obs: &Observable) -> f64 {
    let ev = obs.eigenvalues();
    let mut total = 0.0;
    for (i, a) in ev.iter().enumerate() {
        for b in &ev[i + 1..] {
            total += (a - b) * (a - b);
        }
    }
    total
}

/// Minimal Haar-averaged mean squared error, attained by [`estimate_optimal`].
pub fn analytic_delta_opt(obs: &Observable, copies: usize) -> Result<f64> {
    check_copies(copies)?;
    let d = obs.dim() as f64;
    Ok(spectral_spread(obs) / (d * (d + 1.0) * (copies as f64 + d)))
}

/// Haar-averaged mean squared error of the sample average.
pub fn analytic_delta_av(obs: &Observable, copies: usize) -> Result<f64> {
    check_copies(copies)?;
    let d = obs.dim() as f64;
    Ok(spectral_spread(obs) / (d * (d + 1.0) * copies as f64))
}

/// Variance of the sample average at a fixed state,
/// `(tr[rho Omega^2] - (tr[rho Omega])^2) / N`.
pub fn analytic_delta_av_conditional(state: &PureState, obs: &Observable, copies: usize) -> Result<f64> {
    check_copies(copies)?;
    let probs = outcome_distribution(state, obs)?;
    let mean: f64 = probs.iter().zip(obs.eigenvalues()).map(|(p, w)| p * w).sum();
    let variance: f64 = probs
        .iter()
        .zip(obs.eigenvalues())
        .map(|(p, w)| p * (w - mean) * (w - mean))
        .sum();
    Ok(variance / copies as f64)
}

/// Mean of [`estimate_optimal`] at a fixed state:
/// `(tr Omega + N tr[rho Omega]) / (N + d)`.
pub fn analytic_bias_mean(state: &PureState, obs: &Observable, copies: usize) -> Result<f64> {
    check_copies(copies)?;
    let value = expectation(state, obs)?;
    Ok(EstimatorKind::OptimalPure.conditional_mean(obs, copies, value))
}

/// Haar average of `(tr[rho Omega])^2`, namely
/// `((tr Omega)^2 + tr Omega^2) / (d (d+1))`.
pub fn analytic_second_moment(obs: &Observable) -> f64 {
    let d = obs.dim() as f64;
    let t = obs.trace();
    (t * t + obs.trace_sq()) / (d * (d + 1.0))
}

/// Minimal mean squared error for one copy of a qubit drawn from an
/// isotropic Bloch-ball ensemble with `<n^2> = n2`:
/// `(n2/12) (1 - n2/3) (2 tr Omega^2 - (tr Omega)^2)`.
pub fn analytic_delta_mixed_qubit(obs: &Observable, n2: f64) -> Result<f64> {
    if obs.dim() != 2 {
        return Err(Error::RequiresQubit { dim: obs.dim() });
    }
    check_n2(n2)?;
    Ok(n2 / 12.0 * (1.0 - n2 / 3.0) * spectral_spread(obs))
}

/// Mean squared error of any of the affine estimators for N copies of a qubit
/// drawn from an isotropic Bloch-ball ensemble with `<n^2> = m`.
///
/// Writing `Omega = c 1 + w.sigma` and `omega = a + b * (sample mean)`, the
/// error averages to `(a + b c - c)^2 + |w|^2 [b^2 ((1 - m/3)/N + m/3) + (1 - 2b) m/3]`.
pub fn analytic_mse_isotropic_qubit(obs: &Observable, kind: &EstimatorKind, copies: usize, m: f64) -> Result<f64> {
    if obs.dim() != 2 {
        return Err(Error::RequiresQubit { dim: obs.dim() });
    }
    check_copies(copies)?;
    check_n2(m)?;
    let (a, b) = kind.affine_coefficients(obs, copies);
    let c = obs.trace() / 2.0;
    let w2 = spectral_spread(obs) / 4.0;
    let offset = a + b * c - c;
    let n = copies as f64;
    Ok(offset * offset + w2 * (b * b * ((1.0 - m / 3.0) / n + m / 3.0) + (1.0 - 2.0 * b) * m / 3.0))
}
