//! Command-line companion to `radaug-core`: image IO, dataset manifests,
//! feature tables, model files, and the end-to-end pipeline.

pub mod config;
pub mod error;
pub mod feature_file;
pub mod io;
pub mod manifest;
pub mod model;
pub mod pipeline;
pub mod report;

pub use config::RunConfig;
pub use error::Error;
pub use manifest::{Manifest, ManifestEntry, Split};
pub use pipeline::ResultRow;
