//! Trained classifier persistence as JSON: the weight rows and biases plus
//! the training settings and per-epoch loss log that produced them.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use radaug_core::trainer::{EpochStats, LinearHead, TrainConfig};

use crate::error::Error;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainSettingsRecord {
    pub lr0: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub decay_factor: f64,
    pub patience_epochs: usize,
    pub seed: u64,
}

impl From<&TrainConfig> for TrainSettingsRecord {
    fn from(cfg: &TrainConfig) -> Self {
        Self {
            lr0: cfg.lr0,
            batch_size: cfg.batch_size,
            epochs: cfg.epochs,
            decay_factor: cfg.decay_factor,
            patience_epochs: cfg.patience_epochs,
            seed: cfg.seed,
        }
    }
}

impl TrainSettingsRecord {
    pub fn to_config(&self) -> TrainConfig {
        TrainConfig {
            lr0: self.lr0,
            batch_size: self.batch_size,
            epochs: self.epochs,
            decay_factor: self.decay_factor,
            patience_epochs: self.patience_epochs,
            seed: self.seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub mean_loss: f64,
    pub learning_rate: f64,
}

impl From<&EpochStats> for EpochRecord {
    fn from(s: &EpochStats) -> Self {
        Self {
            mean_loss: s.mean_loss,
            learning_rate: s.learning_rate,
        }
    }
}

/// Serialized form of a trained linear classifier.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub dim: usize,
    pub covid_weights: Vec<f64>,
    pub normal_weights: Vec<f64>,
    pub biases: [f64; 2],
    pub train_settings: TrainSettingsRecord,
    pub epoch_log: Vec<EpochRecord>,
}

impl ModelFile {
    pub fn from_head(head: &LinearHead, cfg: &TrainConfig, log: &[EpochStats]) -> Self {
        Self {
            dim: head.dim(),
            covid_weights: head.weights(0).to_vec(),
            normal_weights: head.weights(1).to_vec(),
            biases: head.biases(),
            train_settings: cfg.into(),
            epoch_log: log.iter().map(EpochRecord::from).collect(),
        }
    }

    pub fn to_head(&self) -> Result<LinearHead, Error> {
        if self.covid_weights.len() != self.dim || self.normal_weights.len() != self.dim {
            return Err(Error::Invalid(format!(
                "model claims dim {} but stores {} and {} weights",
                self.dim,
                self.covid_weights.len(),
                self.normal_weights.len()
            )));
        }
        LinearHead::from_parts(
            [self.covid_weights.clone(), self.normal_weights.clone()],
            self.biases,
        )
        .map_err(Error::from)
    }

    pub fn save(&self, path: &Path) -> Result<(), Error> {
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Internal(format!("model serialization: {e}")))?;
        fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::format(path, format!("model JSON: {e}")))
    }
}
