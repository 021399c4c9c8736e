//! Trained model files: the weight vector plus the settings that produced
//! it, as JSON.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::{LossSettings, RunConfig};
use crate::error::{CliError, Result};

pub const MODEL_FORMAT: &str = "smoothsvm-linear";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelLoss {
    pub family: String,
    pub theta: f64,
    pub sigma: f64,
    pub gamma: f64,
    pub bandwidth: f64,
    pub abs_rescale: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    pub loss: ModelLoss,
    pub lambda: f64,
    pub solver: String,
    pub n_features: usize,
    pub weights: Vec<f64>,
}

impl ModelFile {
    pub fn new(cfg: &RunConfig, weights: Vec<f64>) -> Result<Self> {
        let loss = cfg.loss.build()?;
        let LossSettings { abs_rescale, .. } = cfg.loss;
        Ok(ModelFile {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            loss: ModelLoss {
                family: loss.family().name().into(),
                theta: loss.theta(),
                sigma: loss.sigma(),
                gamma: loss.gamma(),
                bandwidth: loss.bandwidth(),
                abs_rescale,
            },
            lambda: cfg.lambda,
            solver: cfg.solver.name().into(),
            n_features: weights.len(),
            weights,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let m: ModelFile = serde_json::from_str(&text).map_err(|source| CliError::Json {
            path: path.into(),
            source,
        })?;
        if m.format != MODEL_FORMAT || m.version != MODEL_VERSION {
            return Err(CliError::Model(format!(
                "{}: unsupported model format {} v{}",
                path.display(),
                m.format,
                m.version
            )));
        }
        if m.weights.len() != m.n_features || m.weights.iter().any(|w| !w.is_finite()) {
            return Err(CliError::Model(format!(
                "{}: expected {} finite weights, found {}",
                path.display(),
                m.n_features,
                m.weights.len()
            )));
        }
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| CliError::Json {
        path: path.into(),
        source,
    })?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        let w = vec![0.1 + 0.2, -1e-300, 3.0];
        let m = ModelFile::new(&RunConfig::default(), w.clone()).unwrap();
        m.save(&path).unwrap();
        let back = ModelFile::load(&path).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.loss.family, "smooth-hinge-g");
        assert_eq!(back.loss.theta, 1.0);
        for (a, b) in back.weights.iter().zip(&w) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn rejects_inconsistent_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        let mut m = ModelFile::new(&RunConfig::default(), vec![1.0, 2.0]).unwrap();
        m.n_features = 3;
        m.save(&path).unwrap();
        assert!(matches!(ModelFile::load(&path), Err(CliError::Model(_))));
        m.n_features = 2;
        m.format = "other".into();
        m.save(&path).unwrap();
        assert!(matches!(ModelFile::load(&path), Err(CliError::Model(_))));
    }
}
