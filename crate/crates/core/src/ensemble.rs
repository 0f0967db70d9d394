//! Reproducible randomness and the state ensembles.
//!
//! Every trial owns an [`RngStream`] keyed by `(master_seed, trial_index)`.
//! The stream is a ChaCha8 generator whose key is derived from the master
//! seed and whose 64-bit stream id is the trial index, so trial `k` sees the
//! same numbers no matter which worker runs it or in which order.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::{make_observable, MixedQubitState, Observable, PureState};

/// Independent families of streams sharing one master seed.
pub mod domain {
    pub const TRIALS: u64 = 0;
    pub const PROBE: u64 = 1;
    pub const OBSERVABLE: u64 = 2;
    pub const VERIFY: u64 = 3;
}

#[derive(Debug, Clone)]
pub struct RngStream {
    master_seed: u64,
    domain: u64,
    trial_index: u64,
    rng: ChaCha8Rng,
}

/// Stream for trial `trial_index` of the experiment seeded by `master_seed`.
pub fn derive_stream(master_seed: u64, trial_index: u64) -> RngStream {
    derive_stream_in(master_seed, domain::TRIALS, trial_index)
}

/// Like [`derive_stream`] but in a separate key domain, so auxiliary draws
/// (probe runs, random observables) never collide with trial streams.
pub fn derive_stream_in(master_seed: u64, domain: u64, trial_index: u64) -> RngStream {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&master_seed.to_le_bytes());
    key[8..16].copy_from_slice(&domain.to_le_bytes());
    key[16..24].copy_from_slice(b"expval\0\0");
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(trial_index);
    RngStream {
        master_seed,
        domain,
        trial_index,
        rng,
    }
}

impl RngStream {
    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn domain(&self) -> u64 {
        self.domain
    }

    pub fn trial_index(&self) -> u64 {
        self.trial_index
    }

    /// Uniform draw from [0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    pub fn complex_normal(&mut self) -> Complex64 {
        let re = self.normal();
        let im = self.normal();
        Complex64::new(re, im)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Haar-random pure state: 2d independent standard normals assembled into
/// d complex amplitudes and normalized, which makes the real coordinates
/// uniform on the unit sphere in R^{2d}.
pub fn sample_haar_pure(dim: usize, stream: &mut RngStream) -> PureState {
    loop {
        let amplitudes = DVector::from_fn(dim, |_, _| stream.complex_normal());
        // A zero vector has probability zero; redraw rather than divide by it.
        if let Ok(state) = PureState::normalized(amplitudes) {
            return state;
        }
    }
}

/// Random Hermitian matrix `(A + A^dagger)/2` with complex Gaussian `A`.
pub fn sample_hermitian(dim: usize, stream: &mut RngStream) -> Result<Observable> {
    let a = DMatrix::from_fn(dim, dim, |_, _| stream.complex_normal());
    make_observable((&a + a.adjoint()).scale(0.5))
}

/// Radial distribution of the Bloch vector length for isotropic qubit
/// ensembles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RadialLaw {
    /// |n| = 1: the pure-state ensemble.
    PureSurface,
    /// n uniform in the unit ball.
    UniformBall,
    /// |n| = r.
    FixedRadius { r: f64 },
    /// |n| = r with probability w, otherwise 0.
    TwoPoint { r: f64, w: f64 },
}

impl RadialLaw {
    /// Closed-form second moment <n^2>.
    pub fn second_moment(&self) -> f64 {
        match *self {
            RadialLaw::PureSurface => 1.0,
            RadialLaw::UniformBall => 0.6,
            RadialLaw::FixedRadius { r } => r * r,
            RadialLaw::TwoPoint { r, w } => w * r * r,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let radius_ok = |r: f64| (0.0..=1.0).contains(&r);
        match *self {
            RadialLaw::PureSurface | RadialLaw::UniformBall => Ok(()),
            RadialLaw::FixedRadius { r } if radius_ok(r) => Ok(()),
            RadialLaw::TwoPoint { r, w } if radius_ok(r) && (0.0..=1.0).contains(&w) => Ok(()),
            other => Err(Error::InvalidRadialLaw(format!(
                "{other:?}: radius must lie in [0, 1] and weight in [0, 1]"
            ))),
        }
    }

    fn sample_radius(&self, stream: &mut RngStream) -> f64 {
        match *self {
            RadialLaw::PureSurface => 1.0,
            RadialLaw::UniformBall => stream.uniform().cbrt(),
            RadialLaw::FixedRadius { r } => r,
            RadialLaw::TwoPoint { r, w } => {
                if stream.uniform() < w {
                    r
                } else {
                    0.0
                }
            }
        }
    }

    /// Short label used in CSV output.
    pub fn label(&self) -> String {
        match *self {
            RadialLaw::PureSurface => "pure-surface".into(),
            RadialLaw::UniformBall => "uniform-ball".into(),
            RadialLaw::FixedRadius { r } => format!("fixed-radius(r={r})"),
            RadialLaw::TwoPoint { r, w } => format!("two-point(r={r},w={w})"),
        }
    }
}

/// Isotropic Bloch vector: uniform direction, radius drawn from `law`.
pub fn sample_bloch_mixed(law: &RadialLaw, stream: &mut RngStream) -> Result<MixedQubitState> {
    law.validate()?;
    let direction = loop {
        let v = [stream.normal(), stream.normal(), stream.normal()];
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            break v.map(|x| x / norm);
        }
    };
    let radius = law.sample_radius(stream);
    MixedQubitState::new(direction.map(|x| x * radius))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible() {
        let mut a = derive_stream(42, 0);
        let mut b = derive_stream(42, 0);
        let xs: Vec<u64> = (0..10).map(|_| a.next_u64()).collect();
        let ys: Vec<u64> = (0..10).map(|_| b.next_u64()).collect();
        assert_eq!(xs, ys);
    }

    #[test]
    fn distinct_trials_and_domains_differ() {
        let first = |mut s: RngStream| s.next_u64();
        assert_ne!(first(derive_stream(42, 0)), first(derive_stream(42, 1)));
        assert_ne!(first(derive_stream(42, 0)), first(derive_stream(43, 0)));
        assert_ne!(
            first(derive_stream_in(42, domain::TRIALS, 0)),
            first(derive_stream_in(42, domain::PROBE, 0))
        );
    }

    #[test]
    fn haar_state_is_normalized() {
        for k in 0..50 {
            let psi = sample_haar_pure(2, &mut derive_stream(1, k));
            assert!((psi.amplitudes().norm_squared() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn surface_and_degenerate_laws() {
        for k in 0..100 {
            let n = sample_bloch_mixed(&RadialLaw::PureSurface, &mut derive_stream(3, k)).unwrap();
            assert!((n.radius_sq() - 1.0).abs() < 1e-12);
            let z = sample_bloch_mixed(&RadialLaw::FixedRadius { r: 0.0 }, &mut derive_stream(3, k)).unwrap();
            assert_eq!(z.bloch().map(f64::abs), [0.0; 3]);
        }
    }

    #[test]
    fn invalid_law_is_rejected() {
        let law = RadialLaw::FixedRadius { r: 1.5 };
        assert!(sample_bloch_mixed(&law, &mut derive_stream(0, 0)).is_err());
        assert!(RadialLaw::TwoPoint { r: 0.5, w: 2.0 }.validate().is_err());
    }

    #[test]
    fn second_moment_closed_forms() {
        assert_eq!(RadialLaw::PureSurface.second_moment(), 1.0);
        assert_eq!(RadialLaw::UniformBall.second_moment(), 0.6);
        assert!((RadialLaw::FixedRadius { r: 0.6 }.second_moment() - 0.36).abs() < 1e-15);
        assert!((RadialLaw::TwoPoint { r: 1.0, w: 0.6 }.second_moment() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn law_serde_shape() {
        let law: RadialLaw = serde_json::from_str(r#"{"fixed-radius": {"r": 0.5}}"#).unwrap();
        assert_eq!(law, RadialLaw::FixedRadius { r: 0.5 });
        let law: RadialLaw = serde_json::from_str(r#""uniform-ball""#).unwrap();
        assert_eq!(law, RadialLaw::UniformBall);
    }
}
