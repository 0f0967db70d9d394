//! Observables, pure states and mixed qubit states.
//!
//! An [`Observable`] is a validated Hermitian matrix together with its
//! spectral decomposition. Eigenvalues are stored in descending order, and
//! measurement outcomes everywhere in the crate are indices into that order.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum entrywise anti-Hermitian part accepted from user input.
pub const HERMITICITY_TOLERANCE: f64 = 1e-10;

const NORMALIZATION_TOLERANCE: f64 = 1e-12;
const ORTHONORMALITY_TOLERANCE: f64 = 1e-12;
const RECONSTRUCTION_TOLERANCE: f64 = 1e-10;

/// A Hermitian observable with its eigendecomposition.
#[derive(Debug, Clone)]
pub struct Observable {
    matrix: DMatrix<Complex64>,
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<Complex64>,
}

/// Builds an observable from a square complex matrix.
///
/// Inputs whose anti-Hermitian part exceeds [`HERMITICITY_TOLERANCE`] are
/// rejected. Accepted inputs are stored as their Hermitian part.
pub fn make_observable(entries: DMatrix<Complex64>) -> Result<Observable> {
    let (rows, cols) = entries.shape();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    if rows < 2 {
        return Err(Error::DimensionTooSmall { dim: rows, min: 2 });
    }
    let adjoint = entries.adjoint();
    let deviation = (&entries - &adjoint).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if deviation > HERMITICITY_TOLERANCE {
        return Err(Error::NotHermitian {
            deviation,
            tolerance: HERMITICITY_TOLERANCE,
        });
    }
    let matrix = (&entries + &adjoint).scale(0.5);

    let eigen = matrix.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..rows).collect();
    // Stable sort keeps the solver's order inside degenerate eigenspaces.
    order.sort_by(|&a, &b| eigen.eigenvalues[b].total_cmp(&eigen.eigenvalues[a]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| eigen.eigenvalues[k]).collect();
    let eigenvectors = DMatrix::from_fn(rows, rows, |r, c| eigen.eigenvectors[(r, order[c])]);

    let observable = Observable {
        matrix,
        eigenvalues,
        eigenvectors,
    };
    observable.validate_spectrum()?;
    Ok(observable)
}

impl Observable {
    /// Diagonal observable with the given real entries.
    pub fn diagonal(values: &[f64]) -> Result<Self> {
        let d = values.len();
        make_observable(DMatrix::from_fn(d, d, |r, c| {
            if r == c {
                Complex64::new(values[r], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }

    pub fn pauli_z() -> Self {
        Self::diagonal(&[1.0, -1.0]).expect("diag(1, -1) is a valid observable")
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::diagonal(&vec![1.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Unitary whose columns are the eigenvectors, ordered like
    /// [`Observable::eigenvalues`].
    pub fn eigenvectors(&self) -> &DMatrix<Complex64> {
        &self.eigenvectors
    }

    /// The eigenvector for outcome `index` as a pure state.
    pub fn eigenstate(&self, index: usize) -> PureState {
        PureState {
            amplitudes: self.eigenvectors.column(index).into_owned(),
        }
    }

    /// tr Omega.
    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|k| self.matrix[(k, k)].re).sum()
    }

    /// tr Omega^2, computed as the squared Frobenius norm.
    pub fn trace_sq(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Omega + shift * identity.
    pub fn shifted(&self, shift: f64) -> Result<Self> {
        let d = self.dim();
        make_observable(&self.matrix + DMatrix::<Complex64>::identity(d, d).scale(shift))
    }

    /// factor * Omega.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        make_observable(self.matrix.scale(factor))
    }

    fn validate_spectrum(&self) -> Result<()> {
        let d = self.dim();
        let gram = self.eigenvectors.adjoint() * &self.eigenvectors;
        let ortho = (gram - DMatrix::<Complex64>::identity(d, d))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if ortho > ORTHONORMALITY_TOLERANCE {
            return Err(Error::Eigendecomposition(format!(
                "eigenvectors deviate from orthonormality by {ortho:e}"
            )));
        }
        let lambda = DMatrix::from_diagonal(&DVector::from_iterator(
            d,
            self.eigenvalues.iter().map(|&x| Complex64::new(x, 0.0)),
        ));
        let rebuilt = &self.eigenvectors * lambda * self.eigenvectors.adjoint();
        let recon = (rebuilt - &self.matrix).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if recon > RECONSTRUCTION_TOLERANCE {
            return Err(Error::Eigendecomposition(format!(
                "spectral reconstruction error {recon:e}"
            )));
        }
        Ok(())
    }

    /// Parses the JSON observable format
    /// `{ "dim": d, "matrix": [[[re, im], ...], ...] }`.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: ObservableFile = serde_json::from_str(text).map_err(|source| Error::Parse {
            what: "observable JSON".into(),
            source,
        })?;
        file.into_observable()
    }

    pub fn to_json_string(&self) -> String {
        let file = ObservableFile {
            dim: self.dim(),
            matrix: self
                .matrix
                .row_iter()
                .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        };
        serde_json::to_string(&file).expect("observable serializes")
    }
}

/// On-disk observable representation, row-major with `[re, im]` entries.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObservableFile {
    pub dim: usize,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

impl ObservableFile {
    pub fn into_observable(self) -> Result<Observable> {
        let d = self.dim;
        if self.matrix.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: self.matrix.len(),
            });
        }
        if let Some(row) = self.matrix.iter().find(|row| row.len() != d) {
            return Err(Error::NotSquare {
                rows: d,
                cols: row.len(),
            });
        }
        make_observable(DMatrix::from_fn(d, d, |r, c| {
            let [re, im] = self.matrix[r][c];
            Complex64::new(re, im)
        }))
    }
}

/// A normalized state vector `|phi> = sum_i c_i |i>`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: DVector<Complex64>,
}

impl PureState {
    /// Wraps amplitudes that are already normalized within 1e-12.
    pub fn new(amplitudes: DVector<Complex64>) -> Result<Self> {
        let norm_sq = amplitudes.norm_squared();
        if (norm_sq - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::NotNormalized { norm_sq });
        }
        Ok(Self { amplitudes })
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn normalized(amplitudes: DVector<Complex64>) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized { norm_sq: norm * norm });
        }
        Ok(Self {
            amplitudes: amplitudes.unscale(norm),
        })
    }

    /// Computational basis state `|index>`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut amplitudes = DVector::zeros(dim);
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    /// Multiplies every amplitude by `e^{i theta}`.
    pub fn with_global_phase(&self, theta: f64) -> Self {
        Self {
            amplitudes: self.amplitudes.map(|c| c * Complex64::from_polar(1.0, theta)),
        }
    }

    /// rho = |phi><phi|.
    pub fn density_matrix(&self) -> DMatrix<Complex64> {
        &self.amplitudes * self.amplitudes.adjoint()
    }

    /// Bloch vector of a qubit state.
    pub fn bloch_vector(&self) -> Result<[f64; 3]> {
        if self.dim() != 2 {
            return Err(Error::RequiresQubit { dim: self.dim() });
        }
        let (c0, c1) = (self.amplitudes[0], self.amplitudes[1]);
        let coherence = c0.conj() * c1;
        Ok([2.0 * coherence.re, 2.0 * coherence.im, c0.norm_sqr() - c1.norm_sqr()])
    }
}

/// A qubit density matrix `(1 + n.sigma)/2` with `|n| <= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedQubitState {
    bloch: [f64; 3],
}

impl MixedQubitState {
    pub fn new(bloch: [f64; 3]) -> Result<Self> {
        let length = bloch.iter().map(|x| x * x).sum::<f64>().sqrt();
        if length > 1.0 + 1e-12 || !length.is_finite() {
            return Err(Error::BlochOutsideBall { length });
        }
        Ok(Self { bloch })
    }

    pub fn bloch(&self) -> [f64; 3] {
        self.bloch
    }

    pub fn radius_sq(&self) -> f64 {
        self.bloch.iter().map(|x| x * x).sum()
    }

    pub fn density_matrix(&self) -> DMatrix<Complex64> {
        let [x, y, z] = self.bloch;
        let half = |re: f64, im: f64| Complex64::new(re / 2.0, im / 2.0);
        DMatrix::from_row_slice(2, 2, &[half(1.0 + z, 0.0), half(x, -y), half(x, y), half(1.0 - z, 0.0)])
    }

    /// p_i = <i|rho|i> for the eigenbasis of `obs`.
    pub fn outcome_distribution(&self, obs: &Observable) -> Result<Vec<f64>> {
        if obs.dim() != 2 {
            return Err(Error::RequiresQubit { dim: obs.dim() });
        }
        let rho = self.density_matrix();
        Ok((0..2)
            .map(|i| {
                let v = obs.eigenvectors().column(i);
                (v.adjoint() * &rho * v)[(0, 0)].re.max(0.0)
            })
            .collect())
    }
}

fn check_dims(state_dim: usize, obs: &Observable) -> Result<()> {
    if state_dim != obs.dim() {
        return Err(Error::DimensionMismatch {
            expected: obs.dim(),
            found: state_dim,
        });
    }
    Ok(())
}

/// Outcome probabilities `p_i = |<i|phi>|^2` of a projective measurement of
/// `obs`, indexed like the observable's eigenvalues.
pub fn outcome_distribution(state: &PureState, obs: &Observable) -> Result<Vec<f64>> {
    check_dims(state.dim(), obs)?;
    let overlaps = obs.eigenvectors().adjoint() * state.amplitudes();
    Ok(overlaps.iter().map(|z| z.norm_sqr()).collect())
}

/// `<phi|Omega|phi> = sum_i Omega_i |<i|phi>|^2`.
pub fn expectation(state: &PureState, obs: &Observable) -> Result<f64> {
    let probs = outcome_distribution(state, obs)?;
    Ok(probs.iter().zip(obs.eigenvalues()).map(|(p, omega)| p * omega).sum())
}

/// `tr[(1 + n.sigma) Omega] / 2`.
pub fn mixed_qubit_expectation(state: &MixedQubitState, obs: &Observable) -> Result<f64> {
    if obs.dim() != 2 {
        return Err(Error::RequiresQubit { dim: obs.dim() });
    }
    let rho = state.density_matrix();
    Ok((rho * obs.matrix()).trace().re)
}
