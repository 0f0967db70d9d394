mod common;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use common::gauss_legendre;
use expval::ensemble::{derive_stream, sample_haar_pure, sample_hermitian};
use expval::estimation::{analytic_delta_av, analytic_delta_opt, EstimatorKind, OutcomeSequence};
use expval::hermitian::{expectation, outcome_distribution, Observable, PureState};
use expval::symmetric::checks::check_trace_formulas;
use expval::symmetric::moments::tensor_power;
use expval::symmetric::{
    build_projector_occupation, build_projector_permutation, check_unbiased_lemma, embed_one_body,
    enumerate_occupations, haar_average_tensor_power, omega_hat_av, partial_trace_last, symmetric_dimension,
    SparseMatrix,
};

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).unwrap();
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// `(1/n!) sum_pi P_pi`, every permutation listed in lexicographic order.
fn brute_force_projector(d: usize, n: usize) -> DMatrix<f64> {
    let total = d.pow(n as u32);
    let mut sum = DMatrix::<f64>::zeros(total, total);
    let mut perm: Vec<usize> = (0..n).collect();
    let mut count = 0usize;
    loop {
        for c in 0..total {
            let word: Vec<usize> = (0..n).map(|k| (c / d.pow((n - 1 - k) as u32)) % d).collect();
            let row = perm.iter().fold(0, |acc, &k| acc * d + word[k]);
            sum[(row, c)] += 1.0;
        }
        count += 1;
        if !next_permutation(&mut perm) {
            break;
        }
    }
    sum / count as f64
}

fn dense_embedding(obs: &Observable, position: usize, copies: usize) -> DMatrix<Complex64> {
    let d = obs.dim();
    let id = DMatrix::<Complex64>::identity(d, d);
    (1..=copies).fold(DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0)), |acc, k| {
        acc.kronecker(if k == position { obs.matrix() } else { &id })
    })
}

#[test]
fn both_constructions_match_brute_force() {
    for (d, n) in [
        (2, 1),
        (2, 2),
        (2, 3),
        (2, 4),
        (2, 5),
        (3, 2),
        (3, 3),
        (3, 4),
        (4, 2),
        (4, 3),
    ] {
        let oracle = brute_force_projector(d, n);
        let perm = build_projector_permutation(d, n).unwrap().matrix().to_dense();
        let occ = build_projector_occupation(d, n).unwrap().matrix().to_dense();
        assert!((&perm - &oracle).norm() < 1e-12, "({d},{n}) permutation");
        assert!((&occ - &oracle).norm() < 1e-12, "({d},{n}) occupation");
        assert_eq!(perm, perm.transpose(), "({d},{n}) not exactly symmetric");
    }
}

#[test]
fn dimensions_and_enumeration() {
    assert_eq!(symmetric_dimension(2, 2).unwrap(), 3);
    assert_eq!(symmetric_dimension(2, 3).unwrap(), 4);
    assert_eq!(symmetric_dimension(3, 3).unwrap(), 10);
    for n in 0..6 {
        assert_eq!(symmetric_dimension(1, n).unwrap(), 1);
    }
    for d in 2..6 {
        for n in 1..5 {
            let count = enumerate_occupations(d, n).len() as u64;
            assert_eq!(count, symmetric_dimension(d as u64, n as u64).unwrap());
        }
    }
}

#[test]
fn qutrit_quadruple_traces_against_dense_oracle() {
    let (d, n) = (3, 4);
    let s = brute_force_projector(d, n).map(|x| Complex64::new(x, 0.0));
    let dn = 15.0;
    for seed in 0..3 {
        let obs = sample_hermitian(d, &mut derive_stream(seed, 40)).unwrap();
        let (t, t2) = (obs.trace(), obs.trace_sq());
        let embedded: Vec<_> = (1..=n).map(|k| dense_embedding(&obs, k, n)).collect();
        for a in 0..n {
            let one = (&s * &embedded[a]).trace().re;
            assert!((one - dn / 3.0 * t).abs() < 1e-10 * dn);
            for b in 0..n {
                let two = (&s * &embedded[a] * &embedded[b]).trace().re;
                let want = if a == b {
                    dn / 3.0 * t2
                } else {
                    dn / 12.0 * (t2 + t * t)
                };
                assert!(
                    (two - want).abs() < 1e-10 * dn * (1.0 + t2),
                    "({a},{b}) {two} vs {want}"
                );
            }
        }
    }
    let projector = build_projector_permutation(d, n).unwrap();
    let observables: Vec<_> = (0..3)
        .map(|k| sample_hermitian(d, &mut derive_stream(k, 40)).unwrap())
        .collect();
    for report in check_trace_formulas(&projector, &observables).unwrap() {
        assert!(report.max_deviation < 1e-10, "{}", report.to_json_line());
    }
}

#[test]
fn trace_formulas_over_many_observables() {
    for d in [2, 3] {
        for n in [2, 3, 4] {
            let projector = build_projector_permutation(d, n).unwrap();
            let observables: Vec<_> = (0..20)
                .map(|k| sample_hermitian(d, &mut derive_stream(100 + k, n as u64)).unwrap())
                .collect();
            for report in check_trace_formulas(&projector, &observables).unwrap() {
                assert!(report.pass, "{}", report.to_json_line());
            }
        }
    }
}

#[test]
fn sample_average_operator_is_unbiased_on_tensor_powers() {
    let obs = sample_hermitian(2, &mut derive_stream(50, 0)).unwrap();
    let op = omega_hat_av(&obs, 3).unwrap();
    for k in 0..100 {
        let psi = sample_haar_pure(2, &mut derive_stream(51, k));
        let phi = tensor_power(&psi, 3);
        let y = op.mul_vec(phi.as_slice());
        let value: Complex64 = phi.iter().zip(&y).map(|(a, b)| a.conj() * b).sum();
        assert!((value.re - expectation(&psi, &obs).unwrap()).abs() < 1e-12);
    }
}

#[test]
fn partial_trace_identity_for_pauli_z_pair() {
    let z = Observable::pauli_z();
    let s3 = build_projector_permutation(2, 3).unwrap().matrix().to_complex();
    let lhs = partial_trace_last(&s3.mul(&embed_one_body(&z, 3, 3).unwrap()), 2, 3).unwrap();
    let s2 = build_projector_permutation(2, 2).unwrap().matrix().to_complex();
    let sum = embed_one_body(&z, 1, 2)
        .unwrap()
        .add(&embed_one_body(&z, 2, 2).unwrap());
    let rhs = s2.mul(&sum).scale(Complex64::new(1.0 / 3.0, 0.0));
    assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    assert!((lhs.trace() - s3.mul(&embed_one_body(&z, 3, 3).unwrap()).trace()).norm() < 1e-12);
}

/// Averages `f` over Haar-random qubit states, exactly for polynomials of
/// low degree in the Bloch vector.
fn sphere_average<F: Fn(&PureState) -> f64>(f: F) -> f64 {
    let azimuths = 16;
    let mut total = 0.0;
    for (c, w) in gauss_legendre(10, -1.0, 1.0) {
        let half = c.acos() / 2.0;
        for k in 0..azimuths {
            let phi = 2.0 * std::f64::consts::PI * k as f64 / azimuths as f64;
            let amplitudes = DVector::from_vec(vec![
                Complex64::new(half.cos(), 0.0),
                Complex64::from_polar(half.sin(), phi),
            ]);
            total += w / 2.0 / azimuths as f64 * f(&PureState::normalized(amplitudes).unwrap());
        }
    }
    total
}

/// Exact mean squared error of `kind` at a fixed qubit state, summing over
/// every outcome tuple.
fn exact_error(psi: &PureState, obs: &Observable, kind: EstimatorKind, copies: usize) -> f64 {
    let probs = outcome_distribution(psi, obs).unwrap();
    let truth = expectation(psi, obs).unwrap();
    (0..1usize << copies)
        .map(|a| {
            let indices: Vec<usize> = (0..copies).map(|k| (a >> k) & 1).collect();
            let weight: f64 = indices.iter().map(|&i| probs[i]).product();
            let seq = OutcomeSequence::from_indices(indices, obs).unwrap();
            weight * (kind.estimate(&seq, obs).unwrap() - truth).powi(2)
        })
        .sum()
}

#[test]
fn averaged_errors_match_quadrature_oracle() {
    for seed in 0..4 {
        let obs = sample_hermitian(2, &mut derive_stream(seed, 60)).unwrap();
        for copies in 1..=4 {
            let opt = sphere_average(|psi| exact_error(psi, &obs, EstimatorKind::OptimalPure, copies));
            let av = sphere_average(|psi| exact_error(psi, &obs, EstimatorKind::SampleAverage, copies));
            assert!(
                (opt - analytic_delta_opt(&obs, copies).unwrap()).abs() < 1e-12,
                "opt N={copies}"
            );
            assert!(
                (av - analytic_delta_av(&obs, copies).unwrap()).abs() < 1e-12,
                "av N={copies}"
            );
        }
    }
}

#[test]
fn unbiasedness_lemma_on_qubit_pairs() {
    let report = check_unbiased_lemma(2, 2, 1000, &mut derive_stream(70, 0)).unwrap();
    assert!(report.forward_max_deviation < 1e-10);
    assert!(report.negative_control_deviation < 1e-12);
    let report = check_unbiased_lemma(2, 3, 10, &mut derive_stream(70, 1)).unwrap();
    assert!(report.ub_pure_deviation < 1e-12);
}

#[test]
fn first_moment_is_maximally_mixed() {
    let avg = haar_average_tensor_power(4, 1, 1_000_000, &mut derive_stream(80, 0)).unwrap();
    let target = DMatrix::<Complex64>::identity(4, 4).unscale(4.0);
    assert!((avg - target).norm() < 0.005);
}

#[test]
fn projected_tensor_power_has_unit_weight() {
    let s = build_projector_occupation(3, 3).unwrap().matrix().to_complex();
    let psi = sample_haar_pure(3, &mut derive_stream(90, 0));
    let phi = tensor_power(&psi, 3);
    let rho = SparseMatrix::from_dense(&(&phi * phi.adjoint()));
    assert!((s.trace_product(&rho).re - 1.0).abs() < 1e-12);
}
