use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ensemble::RadialLaw;
use crate::error::{Error, Result};
use crate::estimation::EstimatorKind;

/// State ensemble sampled once per trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ensemble {
    HaarPure,
    Bloch(RadialLaw),
}

impl Ensemble {
    pub fn label(&self) -> String {
        match self {
            Ensemble::HaarPure => "haar-pure".into(),
            Ensemble::Bloch(law) => format!("bloch:{}", law.label()),
        }
    }

    /// `<n^2>` of a Bloch ensemble.
    pub fn second_moment(&self) -> Option<f64> {
        match self {
            Ensemble::HaarPure => None,
            Ensemble::Bloch(law) => Some(law.second_moment()),
        }
    }

    /// Parses `haar-pure`, `bloch:pure-surface`, `bloch:uniform-ball`,
    /// `bloch:fixed-radius=R` or `bloch:two-point=R,W`.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if text == "haar-pure" {
            return Ok(Ensemble::HaarPure);
        }
        let bad = || Error::Config(format!("unknown ensemble `{text}`"));
        let law = text.strip_prefix("bloch:").ok_or_else(bad)?;
        let (name, args) = law.split_once('=').unwrap_or((law, ""));
        let numbers: Vec<f64> = if args.is_empty() {
            Vec::new()
        } else {
            args.split(',')
                .map(|x| x.trim().parse::<f64>().map_err(|_| bad()))
                .collect::<Result<_>>()?
        };
        let law = match (name, numbers.as_slice()) {
            ("pure-surface", &[]) => RadialLaw::PureSurface,
            ("uniform-ball", &[]) => RadialLaw::UniformBall,
            ("fixed-radius", &[r]) => RadialLaw::FixedRadius { r },
            ("two-point", &[r, w]) => RadialLaw::TwoPoint { r, w },
            _ => return Err(bad()),
        };
        law.validate()?;
        Ok(Ensemble::Bloch(law))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dim: usize,
    pub copies: usize,
    pub trials: usize,
    pub master_seed: u64,
    pub estimator: EstimatorKind,
    pub ensemble: Ensemble,
    pub observable_source: String,
    pub workers: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dim: 2,
            copies: 1,
            trials: 100_000,
            master_seed: 0,
            estimator: EstimatorKind::OptimalPure,
            ensemble: Ensemble::HaarPure,
            observable_source: "pauli-z".into(),
            workers: 1,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|source| Error::Parse {
            what: "experiment config".into(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.dim < 2 {
            return Err(Error::DimensionTooSmall { dim: self.dim, min: 2 });
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        self.estimator.validate(self.dim, self.copies)?;
        if let Ensemble::Bloch(law) = &self.ensemble {
            law.validate()?;
            if self.dim != 2 {
                return Err(Error::RequiresQubit { dim: self.dim });
            }
        }
        Ok(())
    }
}
