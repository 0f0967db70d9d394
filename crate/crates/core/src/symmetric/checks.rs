//! Machine-precision checks of the symmetric-subspace identities behind the
//! optimal estimator. Each check returns a [`CheckReport`], serialized as one
//! JSON object per line by the `verify` command.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::Result;
use crate::estimation::{analytic_delta_av, analytic_delta_opt, analytic_second_moment, spectral_spread};
use crate::hermitian::Observable;

use super::lemma::LemmaReport;
use super::operators::{embed_one_body, omega_hat, partial_trace_last, product_basis_diagonal};
use super::projector::{transposition, SymmetricProjector};
use super::sparse::SparseMatrix;
use super::{digits, symmetric_dimension};

pub const PROJECTOR_TOLERANCE: f64 = 1e-12;
pub const TRACE_TOLERANCE: f64 = 1e-9;
pub const IDENTITY_TOLERANCE: f64 = 1e-10;
pub const ATTAINMENT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub params: Value,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckReport {
    pub fn new(check: &str, params: Value, max_deviation: f64, tolerance: f64) -> Self {
        Self {
            check: check.to_string(),
            params,
            max_deviation,
            tolerance,
            pass: max_deviation <= tolerance,
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

fn cell(d: usize, n: usize) -> Value {
    json!({ "d": d, "n": n })
}

fn cell_with(d: usize, n: usize, observables: usize) -> Value {
    json!({ "d": d, "n": n, "observables": observables })
}

fn complex(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn check_projector_equivalence(perm: &SymmetricProjector, occ: &SymmetricProjector) -> CheckReport {
    CheckReport::new(
        "projector_construction_equivalence",
        cell(perm.local_dim(), perm.copies()),
        perm.matrix().frobenius_diff(occ.matrix()),
        PROJECTOR_TOLERANCE,
    )
}

pub fn check_idempotence(p: &SymmetricProjector) -> CheckReport {
    let square = p.matrix().mul(p.matrix());
    CheckReport::new(
        "projector_idempotence",
        cell(p.local_dim(), p.copies()),
        square.max_abs_diff(p.matrix()),
        PROJECTOR_TOLERANCE,
    )
}

pub fn check_trace(p: &SymmetricProjector) -> CheckReport {
    CheckReport::new(
        "projector_trace",
        json!({ "d": p.local_dim(), "n": p.copies(), "d_n": p.dimension() }),
        (p.trace() - p.dimension() as f64).abs(),
        TRACE_TOLERANCE,
    )
}

pub fn check_self_adjoint(p: &SymmetricProjector) -> CheckReport {
    CheckReport::new(
        "projector_self_adjoint",
        cell(p.local_dim(), p.copies()),
        p.matrix().max_abs_diff(&p.matrix().adjoint()),
        PROJECTOR_TOLERANCE,
    )
}

/// `[S_n, T_{k,k+1}] = 0` for every adjacent transposition.
pub fn check_transpositions(p: &SymmetricProjector) -> CheckReport {
    let (d, n) = (p.local_dim(), p.copies());
    let s = p.matrix();
    let deviation = (1..n)
        .map(|k| {
            let t = transposition(d, n, k, k + 1);
            t.mul(s).max_abs_diff(&s.mul(&t))
        })
        .fold(0.0, f64::max);
    CheckReport::new(
        "projector_transposition_commutation",
        cell(d, n),
        deviation,
        PROJECTOR_TOLERANCE,
    )
}

/// `tr_{N+1}[S_{N+1} Omega(N+1)] = S_N (tr Omega + sum_n Omega(n)) / (N+1)`.
pub fn check_partial_trace(
    next: &SymmetricProjector,
    current: &SymmetricProjector,
    observables: &[Observable],
) -> Result<CheckReport> {
    let (d, n) = (current.local_dim(), current.copies());
    let s_next = next.matrix().to_complex();
    let s = current.matrix().to_complex();
    let mut deviation = 0.0f64;
    for obs in observables {
        let lhs = partial_trace_last(&s_next.mul(&embed_one_body(obs, n + 1, n + 1)?), d, n + 1)?;
        let mut body = SparseMatrix::identity(s.nrows()).scale(complex(obs.trace()));
        for position in 1..=n {
            body = body.add(&embed_one_body(obs, position, n)?);
        }
        let rhs = s.mul(&body).scale(complex(1.0 / (n + 1) as f64));
        deviation = deviation.max(lhs.max_abs_diff(&rhs));
    }
    Ok(CheckReport::new(
        "partial_trace_identity",
        cell_with(d, n, observables.len()),
        deviation,
        PROJECTOR_TOLERANCE,
    ))
}

fn relative(lhs: f64, rhs: f64, scale: f64) -> f64 {
    (lhs - rhs).abs() / scale.max(rhs.abs()).max(f64::MIN_POSITIVE)
}

/// The one- and two-body trace formulas and `tr[S_N Omega_hat^2]`.
pub fn check_trace_formulas(p: &SymmetricProjector, observables: &[Observable]) -> Result<Vec<CheckReport>> {
    let (d, n) = (p.local_dim(), p.copies());
    let s = p.matrix().to_complex();
    let dn = p.dimension() as f64;
    let df = d as f64;
    let nf = n as f64;
    let (mut one, mut same, mut distinct, mut hat) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for obs in observables {
        let t = obs.trace();
        let t2 = obs.trace_sq();
        let scale = dn * (1.0 + t2) / df;
        let embedded: Vec<_> = (1..=n).map(|k| embed_one_body(obs, k, n)).collect::<Result<_>>()?;
        for (a, omega_a) in embedded.iter().enumerate() {
            one = one.max(relative(s.trace_product(omega_a).re, dn / df * t, scale));
            for omega_b in &embedded[a..] {
                let lhs = s.trace_product(&omega_a.mul(omega_b)).re;
                if std::ptr::eq(omega_a, omega_b) {
                    same = same.max(relative(lhs, dn / df * t2, scale));
                } else {
                    let rhs = dn / (df * (df + 1.0)) * (t2 + t * t);
                    distinct = distinct.max(relative(lhs, rhs, scale));
                }
            }
        }
        let h = omega_hat(obs, n)?;
        let lhs = s.trace_product(&h.mul(&h)).re;
        let rhs = dn / (df * (df + 1.0) * (nf + df)) * (nf * t2 + (nf + df + 1.0) * t * t);
        hat = hat.max(relative(lhs, rhs, scale));
    }
    let params = cell_with(d, n, observables.len());
    let mut reports = vec![
        CheckReport::new("trace_one_body", params.clone(), one, IDENTITY_TOLERANCE),
        CheckReport::new("trace_two_body_same_slot", params.clone(), same, IDENTITY_TOLERANCE),
    ];
    if n >= 2 {
        reports.push(CheckReport::new(
            "trace_two_body_distinct_slots",
            params.clone(),
            distinct,
            IDENTITY_TOLERANCE,
        ));
    }
    reports.push(CheckReport::new(
        "trace_omega_hat_squared",
        params,
        hat,
        IDENTITY_TOLERANCE,
    ));
    Ok(reports)
}

/// Averaged error for a product-eigenbasis POVM with estimates `omega`,
/// evaluated through both the expanded and the completed-square forms.
struct ErrorDecomposition {
    expanded_total: f64,
    cross_terms_expanded: f64,
    cross_terms_square: f64,
    square_first_term: f64,
    square_total: f64,
}

struct Diagonals {
    s: Vec<f64>,
    s_hat: Vec<f64>,
    s_hat_sq: Vec<f64>,
    lifted: Vec<f64>,
}

fn real_parts(v: Vec<Complex64>) -> Vec<f64> {
    v.into_iter().map(|z| z.re).collect()
}

fn decompose(omega: &[f64], diag: &Diagonals, dn: f64, dn_next: f64, delta3: f64, floor: f64) -> ErrorDecomposition {
    let mut delta1 = 0.0;
    let mut delta2 = 0.0;
    let mut cross_square = 0.0;
    let mut first = 0.0;
    for (a, &w) in omega.iter().enumerate() {
        delta1 += w * w * diag.s[a];
        delta2 += w * diag.lifted[a];
        cross_square += w * w * diag.s[a] - 2.0 * w * diag.s_hat[a];
        first += w * w * diag.s[a] - 2.0 * w * diag.s_hat[a] + diag.s_hat_sq[a];
    }
    let delta1 = delta1 / dn;
    let delta2 = -2.0 * delta2 / dn_next;
    ErrorDecomposition {
        expanded_total: delta1 + delta2 + delta3,
        cross_terms_expanded: delta1 + delta2,
        cross_terms_square: cross_square / dn,
        square_first_term: first / dn,
        square_total: first / dn + floor,
    }
}

/// Completed-square identity and lower-bound attainment. Needs `S_N`,
/// `S_{N+1}` and `S_2` for the same local dimension.
pub fn check_completed_square(
    current: &SymmetricProjector,
    next: &SymmetricProjector,
    pair: &SymmetricProjector,
    observables: &[Observable],
) -> Result<Vec<CheckReport>> {
    let (d, n) = (current.local_dim(), current.copies());
    let dn = current.dimension() as f64;
    let dn_next = next.dimension() as f64;
    let d2 = symmetric_dimension(d as u64, 2)? as f64;
    let s = current.matrix().to_complex();
    let s_next = next.matrix().to_complex();
    let s_pair = pair.matrix().to_complex();

    let mut identity_dev = 0.0f64;
    let mut attain_dev = 0.0f64;
    let mut gap_dev = 0.0f64;
    let mut min_gap_ratio = f64::INFINITY;
    for obs in observables {
        let v = obs.eigenvectors();
        let h = omega_hat(obs, n)?;
        let s_h = s.mul(&h);
        let lifted = partial_trace_last(&s_next.mul(&embed_one_body(obs, n + 1, n + 1)?), d, n + 1)?;
        let diag = Diagonals {
            s: real_parts(product_basis_diagonal(&s, v, n)?),
            s_hat: real_parts(product_basis_diagonal(&s_h, v, n)?),
            s_hat_sq: real_parts(product_basis_diagonal(&s_h.mul(&h), v, n)?),
            lifted: real_parts(product_basis_diagonal(&lifted, v, n)?),
        };
        let delta3 = s_pair
            .trace_product(&embed_one_body(obs, 1, 2)?.mul(&embed_one_body(obs, 2, 2)?))
            .re
            / d2;
        let floor = analytic_delta_opt(obs, n)?;

        let spectrum = obs.eigenvalues();
        let observed = |a: usize| digits(a, d, n).iter().map(|&i| spectrum[i]).sum::<f64>();
        let total = s.nrows();
        let omega_opt: Vec<f64> = (0..total)
            .map(|a| (obs.trace() + observed(a)) / (n + d) as f64)
            .collect();
        let omega_av: Vec<f64> = (0..total).map(|a| observed(a) / n as f64).collect();

        let scale = 1.0 + analytic_second_moment(obs).abs();
        identity_dev = identity_dev.max((delta3 - analytic_second_moment(obs)).abs() / scale);
        for omega in [&omega_opt, &omega_av] {
            let e = decompose(omega, &diag, dn, dn_next, delta3, floor);
            identity_dev = identity_dev
                .max((e.expanded_total - e.square_total).abs() / scale)
                .max((e.cross_terms_expanded - e.cross_terms_square).abs() / scale);
        }
        let opt = decompose(&omega_opt, &diag, dn, dn_next, delta3, floor);
        let av = decompose(&omega_av, &diag, dn, dn_next, delta3, floor);
        attain_dev = attain_dev.max(opt.square_first_term.abs() / scale);
        let gap = analytic_delta_av(obs, n)? - floor;
        gap_dev = gap_dev.max((av.square_first_term - gap).abs() / scale);
        if spectral_spread(obs) > 0.0 {
            min_gap_ratio = min_gap_ratio.min(av.square_first_term / gap);
        }
    }
    let params = cell_with(d, n, observables.len());
    let mut attainment = CheckReport::new(
        "lower_bound_attainment",
        json!({ "d": d, "n": n, "observables": observables.len(), "min_sample_average_gap_ratio": min_gap_ratio }),
        attain_dev.max(gap_dev),
        ATTAINMENT_TOLERANCE,
    );
    // The sample-average POVM must sit strictly above the bound.
    attainment.pass &= min_gap_ratio > 0.5;
    Ok(vec![
        CheckReport::new("completed_square_identity", params, identity_dev, IDENTITY_TOLERANCE),
        attainment,
    ])
}

/// `S_N (omega - Omega_hat)^2 S_N >= 0` for a sweep of scalar `omega`,
/// through its compression onto the occupation basis.
pub fn check_positivity(
    basis: &SparseMatrix<f64>,
    d: usize,
    n: usize,
    observables: &[Observable],
) -> Result<CheckReport> {
    let basis = basis.to_complex();
    let basis_adj = basis.adjoint();
    let total = basis.nrows();
    let mut worst = 0.0f64;
    for obs in observables {
        let h = omega_hat(obs, n)?;
        let spectrum = obs.eigenvalues();
        let (lo, hi) = (spectrum[spectrum.len() - 1] - 1.0, spectrum[0] + 1.0);
        for step in 0..=10 {
            let w = lo + (hi - lo) * step as f64 / 10.0;
            let k = SparseMatrix::identity(total).scale(complex(w)).sub(&h);
            let m: DMatrix<Complex64> = basis_adj.mul(&k.mul(&k).mul(&basis)).to_dense();
            let herm = (&m + m.adjoint()).scale(0.5);
            let min = herm
                .symmetric_eigenvalues()
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(-min);
        }
    }
    Ok(CheckReport::new(
        "square_positivity",
        cell_with(d, n, observables.len()),
        worst.max(0.0),
        PROJECTOR_TOLERANCE,
    ))
}

pub fn lemma_checks(report: &LemmaReport) -> Vec<CheckReport> {
    let params = json!({ "d": report.local_dim, "n": report.copies, "trials": report.trials });
    vec![
        CheckReport::new(
            "lemma_forward",
            params.clone(),
            report.forward_max_deviation.max(report.premise_deviation),
            IDENTITY_TOLERANCE,
        ),
        CheckReport::new(
            "lemma_unbiased_pure",
            params.clone(),
            report.ub_pure_deviation,
            PROJECTOR_TOLERANCE,
        ),
        CheckReport::new(
            "lemma_negative_control",
            params,
            report.negative_control_deviation,
            IDENTITY_TOLERANCE,
        ),
    ]
}
