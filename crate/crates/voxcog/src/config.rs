//! The run configuration document: one JSON file driving every command,
//! identified by a stable content digest that is embedded in all output
//! artifacts.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::audio::SegmentationParams;
use crate::error::{Error, Result};
use crate::features::FeatureConfig;
use crate::model::ModelConfig;
use crate::synth::CorpusSpec;
use crate::trainer::TrainConfig;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
pub struct RunConfig {
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub features: FeatureConfig,
    #[serde(default)]
    pub segmentation: SegmentationParams,
    #[serde(default)]
    pub corpus: CorpusSpec,
    #[serde(default = "default_k")]
    pub k: usize,
}

fn default_k() -> usize {
    3
}

impl RunConfig {
    /// Read a config document, or the defaults when no path is given.
    pub fn load(path: Option<&Path>) -> Result<RunConfig> {
        let cfg = match path {
            None => RunConfig { k: default_k(), ..Default::default() },
            Some(p) => {
                if !p.exists() {
                    return Err(Error::FileNotFound(p.to_path_buf()));
                }
                let text = std::fs::read_to_string(p)?;
                serde_json::from_str(&text)
                    .map_err(|e| Error::Config(format!("{}: {}", p.display(), e)))?
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.train.validate()?;
        self.features.validate()?;
        self.segmentation.validate()?;
        self.corpus.validate()?;
        if self.k < 2 {
            return Err(Error::Config(format!("k = {} (need at least 2 folds)", self.k)));
        }
        if self.model.n_mels != self.features.n_mels {
            return Err(Error::Config(format!(
                "model expects {} mel bands but the feature config produces {}",
                self.model.n_mels, self.features.n_mels
            )));
        }
        Ok(())
    }

    /// Content digest over the canonical serialization, so two documents
    /// that parse to the same configuration share a digest.
    pub fn digest(&self) -> String {
        let canon = serde_json::to_vec(self).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(&canon);
        hasher
            .finalize()
            .iter()
            .map(|b| format!("{:02x}", b))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_digest_is_stable() {
        let cfg = RunConfig::load(None).unwrap();
        assert_eq!(cfg.k, 3);
        assert_eq!(cfg.digest(), cfg.digest());
        let mut other = cfg.clone();
        other.train.seed = 1;
        assert_ne!(cfg.digest(), other.digest());
    }

    #[test]
    fn digest_ignores_formatting() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.json");
        let b = dir.path().join("b.json");
        std::fs::write(&a, "{\"k\": 3}").unwrap();
        std::fs::write(&b, "{\n  \"k\":3\n}\n").unwrap();
        assert_eq!(
            RunConfig::load(Some(&a)).unwrap().digest(),
            RunConfig::load(Some(&b)).unwrap().digest()
        );
    }

    #[test]
    fn bad_values_are_config_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(&p, "{\"k\": 1}").unwrap();
        match RunConfig::load(Some(&p)) {
            Err(e @ Error::Config(_)) => assert_eq!(e.exit_code(), 2),
            other => panic!("expected config error, got {:?}", other),
        }
        std::fs::write(&p, "not json").unwrap();
        assert!(matches!(RunConfig::load(Some(&p)), Err(Error::Config(_))));
        assert!(matches!(
            RunConfig::load(Some(Path::new("/nope.json"))),
            Err(Error::FileNotFound(_))
        ));
    }

    #[test]
    fn mel_mismatch_is_rejected() {
        let mut cfg = RunConfig::load(None).unwrap();
        cfg.model.n_mels = 40;
        assert!(cfg.validate().is_err());
    }
}
