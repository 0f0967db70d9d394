use std::fs;
use std::path::PathBuf;

use crate::ensemble::{derive_stream_in, domain, sample_hermitian};
use crate::error::{Error, Result};
use crate::hermitian::Observable;

/// Where an experiment's observable comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum ObservableSource {
    PauliZ,
    /// Identity of the configured dimension.
    Identity,
    Diagonal(Vec<f64>),
    /// Gaussian Hermitian matrix of the configured dimension, seeded from the
    /// master seed and the dimension.
    RandomHermitian,
    File(PathBuf),
}

impl ObservableSource {
    /// Builtin names are `pauli-z`, `identity`, `random-hermitian` and
    /// `diag(v1,v2,...)`; anything else is read as a JSON file path.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        Ok(match text {
            "pauli-z" => Self::PauliZ,
            "identity" => Self::Identity,
            "random-hermitian" => Self::RandomHermitian,
            _ if text.starts_with("diag(") => {
                let inner = text
                    .strip_prefix("diag(")
                    .and_then(|t| t.strip_suffix(')'))
                    .ok_or_else(|| Error::UnknownBuiltin(text.into()))?;
                let values = inner
                    .split(',')
                    .map(|v| v.trim().parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| Error::UnknownBuiltin(text.into()))?;
                Self::Diagonal(values)
            }
            _ if text.is_empty() => return Err(Error::UnknownBuiltin(text.into())),
            _ => Self::File(PathBuf::from(text)),
        })
    }

    /// Dimension fixed by the source itself, if any.
    pub fn intrinsic_dim(&self) -> Option<usize> {
        match self {
            Self::PauliZ => Some(2),
            Self::Diagonal(v) => Some(v.len()),
            _ => None,
        }
    }

    pub fn load(&self, dim: usize, seed: u64) -> Result<Observable> {
        let obs = match self {
            Self::PauliZ => Observable::pauli_z(),
            Self::Identity => Observable::identity(dim)?,
            Self::Diagonal(values) => Observable::diagonal(values)?,
            Self::RandomHermitian => {
                sample_hermitian(dim, &mut derive_stream_in(seed, domain::OBSERVABLE, dim as u64))?
            }
            Self::File(path) => {
                let text = fs::read_to_string(path).map_err(|source| Error::Io {
                    path: path.display().to_string(),
                    source,
                })?;
                Observable::from_json_str(&text)?
            }
        };
        if obs.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: obs.dim(),
            });
        }
        Ok(obs)
    }
}

/// Loads an observable whose dimension is fixed by the source (builtins
/// `pauli-z`, `diag(...)` and JSON files).
pub fn load_observable(source: &str) -> Result<Observable> {
    let parsed = ObservableSource::parse(source)?;
    match (&parsed, parsed.intrinsic_dim()) {
        (_, Some(dim)) => parsed.load(dim, 0),
        (ObservableSource::File(path), None) => {
            let text = fs::read_to_string(path).map_err(|source| Error::Io {
                path: path.display().to_string(),
                source,
            })?;
            Observable::from_json_str(&text)
        }
        _ => Err(Error::Config(format!("`{source}` needs an explicit dimension"))),
    }
}
