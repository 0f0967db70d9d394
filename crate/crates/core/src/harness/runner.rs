use std::io::{self, Write};
use std::time::Instant;

use rayon::prelude::*;

use crate::ensemble::{derive_stream_in, domain, sample_bloch_mixed, sample_haar_pure};
use crate::error::{Error, Result};
use crate::estimation::{
    analytic_delta_av, analytic_delta_mixed_qubit, analytic_delta_opt, analytic_mse_isotropic_qubit,
    simulate_from_distribution, EstimatorKind,
};
use crate::hermitian::{expectation, mixed_qubit_expectation, outcome_distribution, Observable};
use crate::stats::{mean_estimate, MeanEstimate};

use super::config::{Ensemble, ExperimentConfig};
use super::observable_source::ObservableSource;

pub const CSV_HEADER: &str = "d,N,M,seed,estimator,ensemble,n2,empirical_mse,standard_error,\
analytic_mse,empirical_bias,analytic_bias,wall_time_s";

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub dim: usize,
    pub copies: usize,
    pub trials: usize,
    pub seed: u64,
    pub estimator: EstimatorKind,
    pub ensemble: Ensemble,
    pub empirical_mse: f64,
    /// Sample standard deviation of the squared errors over `sqrt(M)`.
    pub standard_error: f64,
    pub analytic_mse: Option<f64>,
    /// Mean estimate minus the true value at the probe state (the top
    /// eigenvector of the observable).
    pub empirical_bias: f64,
    pub bias_standard_error: f64,
    pub analytic_bias: f64,
    pub wall_time_s: f64,
}

impl ResultRow {
    /// `n2` column: the estimator's assumed `<n^2>`, else the ensemble's.
    pub fn n2(&self) -> Option<f64> {
        self.estimator.n2().or_else(|| self.ensemble.second_moment())
    }

    pub fn to_csv_line(&self, include_timing: bool) -> String {
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        let timing = if include_timing {
            self.wall_time_s.to_string()
        } else {
            String::new()
        };
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.dim,
            self.copies,
            self.trials,
            self.seed,
            self.estimator.label(),
            self.ensemble.label(),
            opt(self.n2()),
            self.empirical_mse,
            self.standard_error,
            opt(self.analytic_mse),
            self.empirical_bias,
            self.analytic_bias,
            timing,
        )
    }
}

/// Closed-form mean squared error for the configured estimator and ensemble,
/// when one is known.
pub fn analytic_mse(config: &ExperimentConfig, estimator: &EstimatorKind, obs: &Observable) -> Option<f64> {
    let n = config.copies;
    match (config.ensemble, estimator) {
        (Ensemble::HaarPure, EstimatorKind::OptimalPure) => analytic_delta_opt(obs, n).ok(),
        (Ensemble::HaarPure, EstimatorKind::SampleAverage) => analytic_delta_av(obs, n).ok(),
        (Ensemble::Bloch(law), EstimatorKind::OptimalMixedQubit { n2 }) if law.second_moment() == *n2 => {
            analytic_delta_mixed_qubit(obs, *n2).ok()
        }
        (Ensemble::HaarPure, _) if obs.dim() == 2 => analytic_mse_isotropic_qubit(obs, estimator, n, 1.0).ok(),
        (Ensemble::Bloch(law), _) => analytic_mse_isotropic_qubit(obs, estimator, n, law.second_moment()).ok(),
        _ => None,
    }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))
}

/// Fills `out[k * E + e]` from trial `k` and estimator `e`, in parallel over
/// trials. Each trial draws only from its own stream.
fn fill_trials<F>(out: &mut [f64], width: usize, workers: usize, trial: F) -> Result<()>
where
    F: Fn(u64, &mut [f64]) -> Result<()> + Sync,
{
    pool(workers)?.install(|| {
        out.par_chunks_mut(width)
            .enumerate()
            .try_for_each(|(k, slot)| trial(k as u64, slot))
    })
}

fn column(values: &[f64], width: usize, e: usize) -> MeanEstimate {
    let col: Vec<f64> = values.iter().skip(e).step_by(width).copied().collect();
    mean_estimate(&col)
}

/// Runs every estimator in `estimators` on the same sampled states and
/// outcomes, one row per estimator.
pub fn run_estimators(
    config: &ExperimentConfig,
    obs: &Observable,
    estimators: &[EstimatorKind],
) -> Result<Vec<ResultRow>> {
    config.validate()?;
    for est in estimators {
        est.validate(config.dim, config.copies)?;
    }
    if obs.dim() != config.dim {
        return Err(Error::DimensionMismatch {
            expected: config.dim,
            found: obs.dim(),
        });
    }
    let started = Instant::now();
    let width = estimators.len();
    let (m, n, seed) = (config.trials, config.copies, config.master_seed);

    let mut squared = vec![0.0; m * width];
    fill_trials(&mut squared, width, config.workers, |k, slot| {
        let mut stream = derive_stream_in(seed, domain::TRIALS, k);
        let (probs, truth) = match &config.ensemble {
            Ensemble::HaarPure => {
                let state = sample_haar_pure(config.dim, &mut stream);
                (outcome_distribution(&state, obs)?, expectation(&state, obs)?)
            }
            Ensemble::Bloch(law) => {
                let state = sample_bloch_mixed(law, &mut stream)?;
                (state.outcome_distribution(obs)?, mixed_qubit_expectation(&state, obs)?)
            }
        };
        let outcomes = simulate_from_distribution(&probs, obs, n, &mut stream)?;
        for (out, est) in slot.iter_mut().zip(estimators) {
            let err = est.estimate(&outcomes, obs)? - truth;
            *out = err * err;
        }
        Ok(())
    })?;

    let probe = obs.eigenstate(0);
    let probe_probs = outcome_distribution(&probe, obs)?;
    let probe_truth = expectation(&probe, obs)?;
    let mut deviations = vec![0.0; m * width];
    fill_trials(&mut deviations, width, config.workers, |k, slot| {
        let mut stream = derive_stream_in(seed, domain::PROBE, k);
        let outcomes = simulate_from_distribution(&probe_probs, obs, n, &mut stream)?;
        for (out, est) in slot.iter_mut().zip(estimators) {
            *out = est.estimate(&outcomes, obs)? - probe_truth;
        }
        Ok(())
    })?;
    let wall_time_s = started.elapsed().as_secs_f64();

    Ok(estimators
        .iter()
        .enumerate()
        .map(|(e, est)| {
            let mse = column(&squared, width, e);
            let bias = column(&deviations, width, e);
            ResultRow {
                dim: config.dim,
                copies: n,
                trials: m,
                seed,
                estimator: *est,
                ensemble: config.ensemble,
                empirical_mse: mse.mean,
                standard_error: mse.standard_error,
                analytic_mse: analytic_mse(config, est, obs),
                empirical_bias: bias.mean,
                bias_standard_error: bias.standard_error,
                analytic_bias: est.conditional_mean(obs, n, probe_truth) - probe_truth,
                wall_time_s,
            }
        })
        .collect())
}

pub fn load_config_observable(config: &ExperimentConfig) -> Result<Observable> {
    ObservableSource::parse(&config.observable_source)?.load(config.dim, config.master_seed)
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ResultRow> {
    config.validate()?;
    let obs = load_config_observable(config)?;
    let mut rows = run_estimators(config, &obs, &[config.estimator])?;
    Ok(rows.remove(0))
}

/// Both pure-state estimators for every `(d, N)` cell, sharing sampled
/// states within a cell. The base estimator is ignored.
pub fn run_sweep(base: &ExperimentConfig, n_values: &[usize], d_values: &[usize]) -> Result<Vec<ResultRow>> {
    if n_values.is_empty() || d_values.is_empty() {
        return Err(Error::Config("sweep needs at least one N and one d".into()));
    }
    let source = ObservableSource::parse(&base.observable_source)?;
    let estimators = [EstimatorKind::OptimalPure, EstimatorKind::SampleAverage];
    let mut rows = Vec::new();
    for &dim in d_values {
        let obs = source.load(dim, base.master_seed)?;
        for &copies in n_values {
            let config = ExperimentConfig {
                dim,
                copies,
                estimator: EstimatorKind::OptimalPure,
                ..base.clone()
            };
            rows.extend(run_estimators(&config, &obs, &estimators)?);
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioSummary {
    pub dim: usize,
    pub copies: usize,
    /// empirical_mse(sample-average) / empirical_mse(optimal-pure).
    pub empirical: f64,
    /// Delta-method error of `empirical`, ignoring the (positive) correlation
    /// between the two estimators.
    pub standard_error: f64,
    /// `(N + d) / N`.
    pub analytic: f64,
}

pub fn sweep_ratios(rows: &[ResultRow]) -> Vec<RatioSummary> {
    let find = |d: usize, n: usize, kind: EstimatorKind| {
        rows.iter().find(|r| r.dim == d && r.copies == n && r.estimator == kind)
    };
    rows.iter()
        .filter(|r| r.estimator == EstimatorKind::OptimalPure)
        .filter_map(|opt| {
            let av = find(opt.dim, opt.copies, EstimatorKind::SampleAverage)?;
            let ratio = av.empirical_mse / opt.empirical_mse;
            let rel = (av.standard_error / av.empirical_mse).powi(2) + (opt.standard_error / opt.empirical_mse).powi(2);
            Some(RatioSummary {
                dim: opt.dim,
                copies: opt.copies,
                empirical: ratio,
                standard_error: ratio.abs() * rel.sqrt(),
                analytic: (opt.copies + opt.dim) as f64 / opt.copies as f64,
            })
        })
        .collect()
}

pub fn write_csv<W: Write>(rows: &[ResultRow], mut out: W, include_timing: bool) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for row in rows {
        writeln!(out, "{}", row.to_csv_line(include_timing))?;
    }
    Ok(())
}
