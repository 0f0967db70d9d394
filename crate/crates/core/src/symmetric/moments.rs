//! Monte Carlo estimate of the Haar moment `<rho^{(x)n}>`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::ensemble::{sample_haar_pure, RngStream};
use crate::error::{Error, Result};
use crate::hermitian::PureState;

use super::tensor_dim;

/// `|phi>^{(x)n}` as a `d^n` vector.
pub fn tensor_power(state: &PureState, n: usize) -> DVector<Complex64> {
    let mut out = DVector::from_element(1, Complex64::new(1.0, 0.0));
    for _ in 0..n {
        out = out.kronecker(state.amplitudes());
    }
    out
}

/// Empirical mean of `rho^{(x)n}` over `trials` Haar-random pure states drawn
/// sequentially from `stream`. Converges to `S_n / d_n`.
pub fn haar_average_tensor_power(
    d: usize,
    n: usize,
    trials: usize,
    stream: &mut RngStream,
) -> Result<DMatrix<Complex64>> {
    let total = tensor_dim(d, n)?;
    if trials == 0 {
        return Err(Error::Config("at least one trial is required".into()));
    }
    let one = Complex64::new(1.0, 0.0);
    let mut acc = DMatrix::from_element(total, total, Complex64::new(0.0, 0.0));
    for _ in 0..trials {
        let phi = tensor_power(&sample_haar_pure(d, stream), n);
        acc.gerc(one, &phi, &phi, one);
    }
    Ok(acc.unscale(trials as f64))
}
