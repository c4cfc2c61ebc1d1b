//! Core algorithms for contrast-enhanced radiograph classification.
//!
//! The crate covers the compute side of the pipeline: grayscale raster
//! primitives, global and tile-based histogram equalization with clip
//! limiting, seeded geometric augmentation for class balancing, the
//! fixed-size tensor transform, a two-class linear softmax head trained
//! with Adam, and the confusion-matrix metric suite.
//!
//! Everything here is deterministic given a seed and runs without the
//! standard library; file formats and orchestration live in the `radaug`
//! companion crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod augment;
pub mod enhance;
pub mod features;
pub mod image;
pub mod metrics;
pub mod preprocess;
pub mod rng;
pub mod trainer;

pub use augment::{balance_class, AugmentConfig};
pub use enhance::{ahe, clahe, equalize_global, ClaheConfig};
pub use image::{GrayImage, Label, Rect};
pub use metrics::ConfusionMatrix;
pub use trainer::{predict, train, FeatureVector, LinearHead, TrainConfig};
