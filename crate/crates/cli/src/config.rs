//! Run configuration file (JSON). Every field has a default so a config may
//! specify only what it overrides; unknown keys are rejected to catch typos.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use radaug_core::augment::AugmentConfig;
use radaug_core::enhance::ClaheConfig;
use radaug_core::trainer::TrainConfig;

use crate::error::Error;

pub const ALLOWED_EPOCH_VALUES: [usize; 5] = [5, 10, 15, 20, 25];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClaheSettings {
    pub tiles_x: u32,
    pub tiles_y: u32,
    pub clip_fraction: f64,
    pub n_bins: usize,
}

impl Default for ClaheSettings {
    fn default() -> Self {
        let core = ClaheConfig::default();
        Self {
            tiles_x: core.tiles_x,
            tiles_y: core.tiles_y,
            clip_fraction: core.clip_fraction,
            n_bins: core.n_bins,
        }
    }
}

impl ClaheSettings {
    pub fn to_core(&self) -> ClaheConfig {
        ClaheConfig {
            tiles_x: self.tiles_x,
            tiles_y: self.tiles_y,
            clip_fraction: self.clip_fraction,
            n_bins: self.n_bins,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentSettings {
    pub max_rotation_deg: f64,
    pub width_shift_fraction: f64,
    pub height_shift_fraction: f64,
    pub horizontal_flip: bool,
    pub clahe: ClaheSettings,
    /// Per-class target after balancing. When absent the majority class
    /// count of the train split is used.
    pub target_count: Option<usize>,
}

impl Default for AugmentSettings {
    fn default() -> Self {
        let core = AugmentConfig::new(0, 1);
        Self {
            max_rotation_deg: core.max_rotation_deg,
            width_shift_fraction: core.width_shift_fraction,
            height_shift_fraction: core.height_shift_fraction,
            horizontal_flip: core.horizontal_flip,
            clahe: ClaheSettings::default(),
            target_count: None,
        }
    }
}

impl AugmentSettings {
    pub fn to_core(&self, seed: u64, target_count: usize) -> AugmentConfig {
        AugmentConfig {
            max_rotation_deg: self.max_rotation_deg,
            width_shift_fraction: self.width_shift_fraction,
            height_shift_fraction: self.height_shift_fraction,
            horizontal_flip: self.horizontal_flip,
            clahe: self.clahe.to_core(),
            seed,
            target_count,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSettings {
    pub lr0: f64,
    pub batch_size: usize,
    pub decay_factor: f64,
    pub patience_epochs: usize,
}

impl Default for TrainSettings {
    fn default() -> Self {
        let core = TrainConfig::default();
        Self {
            lr0: core.lr0,
            batch_size: core.batch_size,
            decay_factor: core.decay_factor,
            patience_epochs: core.patience_epochs,
        }
    }
}

impl TrainSettings {
    pub fn to_core(&self, epochs: usize, seed: u64) -> TrainConfig {
        TrainConfig {
            lr0: self.lr0,
            batch_size: self.batch_size,
            epochs,
            decay_factor: self.decay_factor,
            patience_epochs: self.patience_epochs,
            seed,
        }
    }
}

fn default_seed() -> u64 {
    0
}

fn default_sweep() -> Vec<usize> {
    ALLOWED_EPOCH_VALUES.to_vec()
}

fn default_true() -> bool {
    true
}

/// Top-level pipeline configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub manifest: Option<PathBuf>,
    pub out: Option<PathBuf>,
    /// Single seed feeding both augmentation and training.
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_sweep")]
    pub epochs_sweep: Vec<usize>,
    #[serde(default = "default_true")]
    pub augment_enabled: bool,
    pub augment: AugmentSettings,
    pub train: TrainSettings,
    /// Precomputed feature tables, bypassing image loading. Both or neither.
    pub features_train: Option<PathBuf>,
    pub features_test: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            manifest: None,
            out: None,
            seed: default_seed(),
            epochs_sweep: default_sweep(),
            augment_enabled: true,
            augment: AugmentSettings::default(),
            train: TrainSettings::default(),
            features_train: None,
            features_test: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: Self = serde_json::from_str(&text)
            .map_err(|e| Error::format(path, format!("config JSON: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.epochs_sweep.is_empty() {
            return Err(Error::Invalid("epochs_sweep must not be empty".into()));
        }
        for &e in &self.epochs_sweep {
            if !ALLOWED_EPOCH_VALUES.contains(&e) {
                return Err(Error::Invalid(format!(
                    "epochs_sweep value {e} is not one of {ALLOWED_EPOCH_VALUES:?}"
                )));
            }
        }
        for (i, &e) in self.epochs_sweep.iter().enumerate() {
            if self.epochs_sweep[..i].contains(&e) {
                return Err(Error::Invalid(format!(
                    "epochs_sweep repeats the value {e}"
                )));
            }
        }
        if self.features_train.is_some() != self.features_test.is_some() {
            return Err(Error::Invalid(
                "features_train and features_test must be provided together".into(),
            ));
        }
        // Range checks live in the core config validators; run them early so
        // a bad config fails before any work happens.
        self.augment.to_core(self.seed, 1).validate()?;
        self.train.to_core(ALLOWED_EPOCH_VALUES[0], self.seed).validate()?;
        Ok(())
    }
}
