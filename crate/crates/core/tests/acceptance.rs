//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any fails. Built with `harness = false`.

use std::process::{Command, ExitCode};
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;

use expval::ensemble::sample_hermitian;
use expval::ensemble::{derive_stream_in, domain, RadialLaw};
use expval::estimation::{analytic_delta_mixed_qubit, analytic_delta_opt, EstimatorKind, OutcomeSequence};
use expval::harness::{run_estimators, run_verify, Ensemble, ExperimentConfig, ResultRow, VerifyLevel, VerifyOptions};
use expval::hermitian::Observable;
use expval::symmetric::{build_projector_permutation, haar_average_tensor_power, symmetric_basis};

const SEED: u64 = 20_240_601;
const TRIALS: usize = 1_000_000;
/// Absolute slack for comparisons whose standard error is exactly zero
/// (deterministic outcomes), covering rounding only.
const ROUNDING_FLOOR: f64 = 1e-12;
const MSE_SIGMAS: f64 = 4.0;
const MSE_RELATIVE: f64 = 0.01;
const RATIO_RELATIVE: f64 = 0.03;
const BIAS_SIGMAS: f64 = 4.0;
const MOMENT_FROBENIUS: f64 = 0.005;
const MOMENT_BLOCK: f64 = 0.005;
const MOMENT_OFF_BLOCK: f64 = 0.003;
const ORACLE_DEVIATION: f64 = 1e-10;
const LAW_SIGMAS: f64 = 3.0;

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(failures: Vec<String>, summary: String) -> Self {
        if failures.is_empty() {
            Verdict {
                pass: true,
                detail: summary,
            }
        } else {
            Verdict {
                pass: false,
                detail: format!("{summary}; {}", failures.join("; ")),
            }
        }
    }
}

fn within(empirical: f64, expected: f64, se: f64, sigmas: f64) -> bool {
    (empirical - expected).abs() <= sigmas * se + ROUNDING_FLOOR
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_expval"))
}

fn criterion_1() -> Verdict {
    let started = Instant::now();
    let out = bin()
        .args(["analytic", "--dim", "2", "--copies", "1", "--observable", "pauli-z"])
        .output();
    let elapsed = started.elapsed().as_secs_f64();
    let out = match out {
        Ok(o) if o.status.success() => o,
        other => return Verdict::new(vec![format!("analytic failed: {other:?}")], String::new()),
    };
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).expect("analytic prints JSON");
    let omega_up = report["estimates_for_repeated_outcome"][0]["omega_opt"]
        .as_f64()
        .unwrap_or(f64::NAN);
    let delta_opt = report["delta_opt"].as_f64().unwrap_or(f64::NAN);
    let delta_av = report["delta_av"].as_f64().unwrap_or(f64::NAN);
    let mut failures = Vec::new();
    for (name, got, want) in [
        ("omega_opt(+1)", omega_up, 1.0 / 3.0),
        ("delta_opt", delta_opt, 2.0 / 9.0),
        ("delta_av", delta_av, 2.0 / 3.0),
    ] {
        if (got - want).abs() > 1e-15 {
            failures.push(format!("{name} = {got}, expected {want}"));
        }
    }
    if elapsed >= 1.0 {
        failures.push(format!("runtime {elapsed:.2}s >= 1s"));
    }
    Verdict::new(
        failures,
        format!("omega_opt(+1)={omega_up}, delta_opt={delta_opt}, delta_av={delta_av}, {elapsed:.3}s"),
    )
}

struct Cell {
    dim: usize,
    copies: usize,
    optimal: ResultRow,
    average: ResultRow,
}

/// One random observable per (d, N); both estimators see the same states.
fn pure_grid() -> Vec<Cell> {
    let mut cells = Vec::new();
    for dim in [2, 3, 4] {
        for copies in [1, 2, 4, 8] {
            let index = (dim * 16 + copies) as u64;
            let obs = sample_hermitian(dim, &mut derive_stream_in(SEED, domain::OBSERVABLE, index))
                .expect("random observable");
            let config = ExperimentConfig {
                dim,
                copies,
                trials: TRIALS,
                master_seed: SEED + index,
                ..ExperimentConfig::default()
            };
            let mut rows = run_estimators(
                &config,
                &obs,
                &[EstimatorKind::OptimalPure, EstimatorKind::SampleAverage],
            )
            .expect("grid run");
            let average = rows.pop().unwrap();
            let optimal = rows.pop().unwrap();
            cells.push(Cell {
                dim,
                copies,
                optimal,
                average,
            });
        }
    }
    cells
}

fn check_mse(label: &str, row: &ResultRow, failures: &mut Vec<String>) -> f64 {
    let analytic = row.analytic_mse.expect("closed form exists for pure ensembles");
    let relative = (row.empirical_mse - analytic).abs() / analytic;
    if !within(row.empirical_mse, analytic, row.standard_error, MSE_SIGMAS) || relative >= MSE_RELATIVE {
        failures.push(format!(
            "{label} d={} N={}: empirical {} vs analytic {} (se {}, rel {:.4})",
            row.dim, row.copies, row.empirical_mse, analytic, row.standard_error, relative
        ));
    }
    relative
}

fn criterion_2(cells: &[Cell], grid_seconds: f64) -> Verdict {
    let mut failures = Vec::new();
    let worst = cells
        .iter()
        .map(|c| check_mse("optimal", &c.optimal, &mut failures))
        .fold(0.0, f64::max);
    if grid_seconds >= 600.0 {
        failures.push(format!("runtime {grid_seconds:.0}s >= 600s"));
    }
    Verdict::new(
        failures,
        format!(
            "{} cells, worst relative deviation {worst:.4}, {grid_seconds:.1}s",
            cells.len()
        ),
    )
}

fn criterion_3(cells: &[Cell]) -> Verdict {
    let mut failures = Vec::new();
    let worst = cells
        .iter()
        .map(|c| check_mse("sample-average", &c.average, &mut failures))
        .fold(0.0, f64::max);
    let mut worst_ratio = 0.0f64;
    for c in cells {
        let ratio = c.average.empirical_mse / c.optimal.empirical_mse;
        let expected = (c.copies + c.dim) as f64 / c.copies as f64;
        let relative = (ratio - expected).abs() / expected;
        worst_ratio = worst_ratio.max(relative);
        if relative >= RATIO_RELATIVE {
            failures.push(format!(
                "d={} N={}: av/opt {ratio:.4} vs {expected:.4}",
                c.dim, c.copies
            ));
        }
    }
    Verdict::new(
        failures,
        format!("worst relative deviation {worst:.4}, worst ratio deviation {worst_ratio:.4}"),
    )
}

fn criterion_4(cells: &[Cell]) -> Verdict {
    let mut failures = Vec::new();
    let mut checked = 0;
    for c in cells.iter().filter(|c| c.dim <= 3 && c.copies <= 4) {
        for row in [&c.optimal, &c.average] {
            checked += 1;
            if !within(
                row.empirical_bias,
                row.analytic_bias,
                row.bias_standard_error,
                BIAS_SIGMAS,
            ) {
                failures.push(format!(
                    "{} d={} N={}: bias {} vs {} (se {})",
                    row.estimator.label(),
                    row.dim,
                    row.copies,
                    row.empirical_bias,
                    row.analytic_bias,
                    row.bias_standard_error
                ));
            }
        }
        if c.average.analytic_bias != 0.0 {
            failures.push(format!(
                "sample-average analytic bias nonzero at d={} N={}",
                c.dim, c.copies
            ));
        }
    }
    Verdict::new(failures, format!("{checked} probe comparisons"))
}

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn criterion_5() -> Verdict {
    let mut failures = Vec::new();
    let mut notes = Vec::new();
    for (k, (d, n)) in [(2usize, 2usize), (2, 3), (3, 2)].into_iter().enumerate() {
        let mut stream = derive_stream_in(SEED, domain::VERIFY, k as u64);
        let avg = haar_average_tensor_power(d, n, TRIALS, &mut stream).expect("moment");
        let s = build_projector_permutation(d, n).expect("projector");
        let dn = s.dimension() as f64;
        let s_dense = s.matrix().to_complex().to_dense();
        let frob = (&avg - s_dense.unscale(dn)).norm();

        let p = symmetric_basis(d, n).expect("basis").to_complex().to_dense();
        let block = p.adjoint() * &avg * &p;
        let block_dev = max_abs(&(block - DMatrix::identity(p.ncols(), p.ncols()).unscale(dn)));
        let q = DMatrix::<Complex64>::identity(s_dense.nrows(), s_dense.nrows()) - &s_dense;
        let off = max_abs(&(&q * &avg * &q));

        notes.push(format!("({d},{n}) frob {frob:.4} block {block_dev:.4} off {off:.1e}"));
        if frob >= MOMENT_FROBENIUS {
            failures.push(format!("({d},{n}) Frobenius {frob}"));
        }
        if block_dev >= MOMENT_BLOCK {
            failures.push(format!("({d},{n}) symmetric block deviates by {block_dev} from 1/{dn}"));
        }
        if off >= MOMENT_OFF_BLOCK {
            failures.push(format!("({d},{n}) non-symmetric block magnitude {off}"));
        }
    }
    Verdict::new(failures, notes.join(", "))
}

fn criterion_6() -> Verdict {
    let started = Instant::now();
    let reports = run_verify(VerifyLevel::Full, SEED, VerifyOptions::default()).expect("verify runs");
    let elapsed = started.elapsed().as_secs_f64();
    let mut failures: Vec<String> = reports
        .iter()
        .filter(|r| !r.pass || r.max_deviation >= ORACLE_DEVIATION)
        .map(|r| r.to_json_line())
        .collect();
    for required in [
        "projector_construction_equivalence",
        "projector_idempotence",
        "projector_trace",
        "partial_trace_identity",
        "trace_one_body",
        "trace_two_body_same_slot",
        "trace_two_body_distinct_slots",
        "trace_omega_hat_squared",
        "completed_square_identity",
        "lower_bound_attainment",
        "lemma_forward",
        "lemma_unbiased_pure",
    ] {
        if !reports.iter().any(|r| r.check == required) {
            failures.push(format!("missing check {required}"));
        }
    }
    if elapsed >= 120.0 {
        failures.push(format!("runtime {elapsed:.0}s >= 120s"));
    }
    let worst = reports.iter().map(|r| r.max_deviation).fold(0.0, f64::max);
    Verdict::new(
        failures,
        format!("{} checks, worst deviation {worst:.2e}, {elapsed:.1}s", reports.len()),
    )
}

fn mixed_run(obs: &Observable, law: RadialLaw, n2: f64, seed: u64) -> ResultRow {
    let estimator = EstimatorKind::OptimalMixedQubit { n2 };
    let config = ExperimentConfig {
        trials: TRIALS,
        master_seed: seed,
        estimator,
        ensemble: Ensemble::Bloch(law),
        ..ExperimentConfig::default()
    };
    run_estimators(&config, obs, &[estimator]).expect("mixed run").remove(0)
}

fn criterion_7() -> Verdict {
    let mut failures = Vec::new();
    let mut notes = Vec::new();
    let z = Observable::pauli_z();
    let skewed = sample_hermitian(2, &mut derive_stream_in(SEED, domain::OBSERVABLE, 999)).expect("observable");
    let laws = [
        (0.0, RadialLaw::FixedRadius { r: 0.0 }),
        (0.36, RadialLaw::FixedRadius { r: 0.6 }),
        (0.6, RadialLaw::UniformBall),
        (1.0, RadialLaw::PureSurface),
    ];
    for (name, obs) in [("pauli-z", &z), ("random", &skewed)] {
        for (k, &(n2, law)) in laws.iter().enumerate() {
            let row = mixed_run(obs, law, n2, SEED + 100 + k as u64);
            let analytic = analytic_delta_mixed_qubit(obs, n2).expect("qubit");
            notes.push(format!("{name} n2={n2}: {:.5} vs {analytic:.5}", row.empirical_mse));
            if !within(row.empirical_mse, analytic, row.standard_error, MSE_SIGMAS) {
                failures.push(format!(
                    "{name} n2={n2}: empirical {} vs analytic {analytic} (se {})",
                    row.empirical_mse, row.standard_error
                ));
            }
            if n2 == 1.0 {
                let pure = analytic_delta_opt(obs, 1).expect("opt");
                if (analytic - pure).abs() > 1e-15 || !within(row.empirical_mse, pure, row.standard_error, MSE_SIGMAS) {
                    failures.push(format!("{name}: n2=1 does not reduce to delta_opt {pure}"));
                }
            }
        }
        let blind = EstimatorKind::OptimalMixedQubit { n2: 0.0 };
        for i in 0..2 {
            let seq = OutcomeSequence::from_indices(vec![i], obs).expect("outcome");
            let est = blind.estimate(&seq, obs).expect("estimate");
            if est != obs.trace() / 2.0 {
                failures.push(format!("{name}: n2=0 estimate {est} != trace/2 {}", obs.trace() / 2.0));
            }
        }
    }
    let ball = mixed_run(&z, RadialLaw::UniformBall, 0.6, SEED + 200);
    let two_point = mixed_run(&z, RadialLaw::TwoPoint { r: 1.0, w: 0.6 }, 0.6, SEED + 201);
    let combined = ball.standard_error.hypot(two_point.standard_error);
    notes.push(format!(
        "uniform-ball {:.5} vs two-point {:.5}",
        ball.empirical_mse, two_point.empirical_mse
    ));
    if (ball.empirical_mse - two_point.empirical_mse).abs() > LAW_SIGMAS * combined {
        failures.push("radial laws with n2=0.6 disagree".into());
    }
    Verdict::new(failures, notes.join(", "))
}

fn simulate_csv(workers: &str) -> Result<Vec<u8>, String> {
    let out = bin()
        .args([
            "simulate",
            "--dim",
            "3",
            "--copies",
            "4",
            "--trials",
            "200000",
            "--observable",
            "random-hermitian",
            "--seed",
            "77",
            "--workers",
            workers,
        ])
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(String::from_utf8_lossy(&out.stderr).into_owned());
    }
    Ok(out.stdout)
}

fn criterion_8() -> Verdict {
    let runs: Vec<_> = ["1", "4", "8", "1"].iter().map(|w| simulate_csv(w)).collect();
    let mut failures = Vec::new();
    let first = match &runs[0] {
        Ok(bytes) => bytes.clone(),
        Err(e) => return Verdict::new(vec![e.clone()], String::new()),
    };
    for (label, run) in ["workers=4", "workers=8", "repeat workers=1"].iter().zip(&runs[1..]) {
        match run {
            Ok(bytes) if *bytes == first => {}
            Ok(_) => failures.push(format!("{label} differs")),
            Err(e) => failures.push(format!("{label}: {e}")),
        }
    }
    Verdict::new(failures, format!("{} bytes identical across 4 runs", first.len()))
}

fn report(number: u8, name: &str, verdict: &Verdict) {
    let status = if verdict.pass { "PASS" } else { "FAIL" };
    println!("criterion {number} [{name}]: {status} - {}", verdict.detail);
}

fn main() -> ExitCode {
    let mut all = true;
    let mut record = |number: u8, name: &str, verdict: Verdict| {
        report(number, name, &verdict);
        all &= verdict.pass;
    };

    record(1, "headline numbers", criterion_1());
    let started = Instant::now();
    let cells = pure_grid();
    let grid_seconds = started.elapsed().as_secs_f64();
    record(2, "optimal MSE", criterion_2(&cells, grid_seconds));
    record(3, "sample-average MSE", criterion_3(&cells));
    record(4, "bias law", criterion_4(&cells));
    record(5, "Haar moments", criterion_5());
    record(6, "exact oracle suite", criterion_6());
    record(7, "mixed qubit", criterion_7());
    record(8, "determinism", criterion_8());

    if all {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: FAILED");
        ExitCode::FAILURE
    }
}
