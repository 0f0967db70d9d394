use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use expval::estimation::{
    analytic_delta_av, analytic_delta_mixed_qubit, analytic_delta_opt, analytic_second_moment, spectral_spread,
    EstimatorKind, OutcomeSequence,
};
use expval::harness::{
    analytic_mse, load_config_observable, run_experiment, run_sweep, run_verify, sweep_ratios, write_csv, Ensemble,
    ExperimentConfig, VerifyLevel, VerifyOptions,
};

#[derive(Parser)]
#[command(
    name = "expval",
    version,
    about = "Expectation-value estimation from N copies of a pure state"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the closed-form errors and estimates for a configuration.
    Analytic {
        #[command(flatten)]
        common: CommonArgs,
        /// Observed eigen-indices (0 = largest eigenvalue), e.g. `0,0,1`.
        #[arg(long, value_delimiter = ',')]
        outcomes: Option<Vec<usize>>,
    },
    /// Run one Monte Carlo experiment and write a CSV row.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        /// Fill the wall_time_s column (makes output run-dependent).
        #[arg(long)]
        timing: bool,
    },
    /// Run both pure-state estimators over a grid of (d, N).
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6,7,8")]
        n_values: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "2")]
        d_values: Vec<usize>,
        #[arg(long)]
        timing: bool,
    },
    /// Run the exact symmetric-subspace checks; exit status 2 on any failure.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value = "fast")]
        level: String,
        #[arg(long, hide = true)]
        tamper_projector: bool,
    },
}

#[derive(Args)]
struct CommonArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    copies: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// sample-average, optimal-pure or optimal-mixed-qubit.
    #[arg(long)]
    estimator: Option<String>,
    /// pauli-z, identity, random-hermitian, diag(v1,...) or a JSON file.
    #[arg(long)]
    observable: Option<String>,
    /// Assumed <n^2> for optimal-mixed-qubit.
    #[arg(long)]
    n2: Option<f64>,
    /// haar-pure, bloch:pure-surface, bloch:uniform-ball,
    /// bloch:fixed-radius=R or bloch:two-point=R,W.
    #[arg(long)]
    ensemble: Option<String>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl CommonArgs {
    fn config(&self) -> anyhow::Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(v) = self.dim {
            c.dim = v;
        }
        if let Some(v) = self.copies {
            c.copies = v;
        }
        if let Some(v) = self.trials {
            c.trials = v;
        }
        if let Some(v) = self.seed {
            c.master_seed = v;
        }
        if let Some(v) = &self.observable {
            c.observable_source = v.clone();
        }
        if let Some(v) = &self.ensemble {
            c.ensemble = Ensemble::parse(v)?;
        }
        if let Some(v) = self.workers {
            c.workers = v;
        }
        if let Some(name) = &self.estimator {
            c.estimator = match name.as_str() {
                "sample-average" => EstimatorKind::SampleAverage,
                "optimal-pure" => EstimatorKind::OptimalPure,
                "optimal-mixed-qubit" => {
                    let n2 = self
                        .n2
                        .or(c.estimator.n2())
                        .or(c.ensemble.second_moment())
                        .context("optimal-mixed-qubit needs --n2 or a bloch ensemble")?;
                    EstimatorKind::OptimalMixedQubit { n2 }
                }
                other => bail!("unknown estimator `{other}`"),
            };
        }
        if let (Some(n2), EstimatorKind::OptimalMixedQubit { .. }) = (self.n2, c.estimator) {
            c.estimator = EstimatorKind::OptimalMixedQubit { n2 };
        }
        Ok(c)
    }

    fn output(&self) -> anyhow::Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(path) => Box::new(BufWriter::new(open(path)?)),
            None => Box::new(io::stdout().lock()),
        })
    }
}

fn open(path: &Path) -> anyhow::Result<File> {
    File::create(path).with_context(|| format!("cannot create {}", path.display()))
}

fn analytic(common: &CommonArgs, outcomes: Option<Vec<usize>>) -> anyhow::Result<()> {
    let config = common.config()?;
    config.validate()?;
    let obs = load_config_observable(&config)?;
    let n = config.copies;
    let d = obs.dim();
    let spectrum = obs.eigenvalues();
    let all_equal: Vec<_> = spectrum
        .iter()
        .map(|&w| {
            json!({
                "eigenvalue": w,
                "omega_opt": (obs.trace() + n as f64 * w) / (n + d) as f64,
                "omega_av": w,
            })
        })
        .collect();
    let mut report = json!({
        "dim": d,
        "copies": n,
        "eigenvalues": spectrum,
        "trace": obs.trace(),
        "trace_sq": obs.trace_sq(),
        "spectral_spread": spectral_spread(&obs),
        "delta_opt": analytic_delta_opt(&obs, n)?,
        "delta_av": analytic_delta_av(&obs, n)?,
        "av_over_opt": (n + d) as f64 / n as f64,
        "second_moment": analytic_second_moment(&obs),
        "estimates_for_repeated_outcome": all_equal,
        "configured_estimator": config.estimator.label(),
        "configured_analytic_mse": analytic_mse(&config, &config.estimator, &obs),
    });
    let n2 = config.estimator.n2().or(config.ensemble.second_moment());
    if let (Some(n2), 2, 1) = (n2, d, n) {
        report["n2"] = json!(n2);
        report["delta_mixed"] = json!(analytic_delta_mixed_qubit(&obs, n2)?);
    }
    if let Some(indices) = outcomes {
        let seq = OutcomeSequence::from_indices(indices, &obs)?;
        report["outcomes"] = json!(seq.indices());
        report["omega_opt"] = json!(EstimatorKind::OptimalPure.estimate(&seq, &obs)?);
        report["omega_av"] = json!(EstimatorKind::SampleAverage.estimate(&seq, &obs)?);
    }
    let mut out = common.output()?;
    writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
    Ok(())
}

/// Returns whether every check passed.
fn verify(common: &CommonArgs, level: &str, tamper: bool) -> anyhow::Result<bool> {
    let level: VerifyLevel = level.parse()?;
    let seed = common.seed.unwrap_or(0);
    let reports = run_verify(
        level,
        seed,
        VerifyOptions {
            tamper_projector: tamper,
        },
    )?;
    let mut out = common.output()?;
    for r in &reports {
        writeln!(out, "{}", r.to_json_line())?;
    }
    out.flush()?;
    let failed = reports.iter().filter(|r| !r.pass).count();
    eprintln!("{} checks, {} failed", reports.len(), failed);
    Ok(failed == 0)
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Analytic { common, outcomes } => analytic(&common, outcomes)?,
        Command::Simulate { common, timing } => {
            let row = run_experiment(&common.config()?)?;
            let mut out = common.output()?;
            write_csv(&[row], &mut out, timing)?;
            out.flush()?;
        }
        Command::Sweep {
            common,
            n_values,
            d_values,
            timing,
        } => {
            let rows = run_sweep(&common.config()?, &n_values, &d_values)?;
            let mut out = common.output()?;
            write_csv(&rows, &mut out, timing)?;
            out.flush()?;
            for r in sweep_ratios(&rows) {
                eprintln!(
                    "d={} N={} av/opt={:.4} +- {:.4} (analytic {:.4})",
                    r.dim, r.copies, r.empirical, r.standard_error, r.analytic
                );
            }
        }
        Command::Verify {
            common,
            level,
            tamper_projector,
        } => return verify(&common, &level, tamper_projector),
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
