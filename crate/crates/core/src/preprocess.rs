//! Fixed-size tensor transform applied before a feature backbone.
//!
//! Images are resized to 224x224 with align-corners-off bilinear sampling,
//! replicated to three channels, scaled to `[0, 1]`, and standardized per
//! channel. The training-time variant prepends a random rotation and an
//! optional mirror; evaluation is fully deterministic.

use alloc::vec::Vec;
use core::fmt;

use crate::augment::{hflip, rotate};
use crate::image::{bilinear_sample, GrayImage};
use crate::rng::{self, Stream};

pub const INPUT_SIDE: u32 = 224;
pub const CHANNELS: usize = 3;
pub const CHANNEL_MEANS: [f64; 3] = [0.485, 0.456, 0.406];
pub const CHANNEL_STDS: [f64; 3] = [0.229, 0.224, 0.225];

/// Channel-major `3 x 224 x 224` tensor of finite values.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedTensor {
    values: Vec<f64>,
}

impl NormalizedTensor {
    pub const LEN: usize = CHANNELS * (INPUT_SIDE as usize) * (INPUT_SIDE as usize);

    pub fn from_values(values: Vec<f64>) -> Result<Self, PreprocessError> {
        if values.len() != Self::LEN {
            return Err(PreprocessError::WrongLength {
                expected: Self::LEN,
                actual: values.len(),
            });
        }
        if let Some(&bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(PreprocessError::NonFiniteValue { value: bad });
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, channel: usize, y: u32, x: u32) -> f64 {
        let side = INPUT_SIDE as usize;
        self.values[channel * side * side + y as usize * side + x as usize]
    }
}

/// Bilinear resize with align-corners-off source mapping:
/// `src = (dst + 0.5) * scale - 0.5`, edges clamped.
pub fn resize_bilinear(img: &GrayImage, width: u32, height: u32) -> GrayImage {
    assert!(width > 0 && height > 0, "target dimensions must be nonzero");
    let scale_x = img.width() as f64 / width as f64;
    let scale_y = img.height() as f64 / height as f64;
    GrayImage::from_fn(width, height, |x, y| {
        let sx = (x as f64 + 0.5) * scale_x - 0.5;
        let sy = (y as f64 + 0.5) * scale_y - 0.5;
        bilinear_sample(img, sx, sy)
    })
    .expect("target dimensions are nonzero")
}

/// Resizes to 224x224, replicates the gray channel three times, and scales
/// to `[0, 1]` by dividing by 255.
pub fn to_unit_tensor(img: &GrayImage) -> NormalizedTensor {
    let resized = resize_bilinear(img, INPUT_SIDE, INPUT_SIDE);
    let plane: Vec<f64> = resized.pixels().iter().map(|&p| p as f64 / 255.0).collect();
    let mut values = Vec::with_capacity(NormalizedTensor::LEN);
    for _ in 0..CHANNELS {
        values.extend_from_slice(&plane);
    }
    NormalizedTensor { values }
}

/// Per-channel standardization: `(v - mean) / std`.
pub fn normalize(
    tensor: &NormalizedTensor,
    means: &[f64; 3],
    stds: &[f64; 3],
) -> Result<NormalizedTensor, PreprocessError> {
    check_stds(stds)?;
    check_means(means)?;
    let side = INPUT_SIDE as usize;
    let mut values = Vec::with_capacity(NormalizedTensor::LEN);
    for (c, chunk) in tensor.values.chunks_exact(side * side).enumerate() {
        for &v in chunk {
            values.push((v - means[c]) / stds[c]);
        }
    }
    Ok(NormalizedTensor { values })
}

/// Inverse of [`normalize`]: `v * std + mean`.
pub fn denormalize(
    tensor: &NormalizedTensor,
    means: &[f64; 3],
    stds: &[f64; 3],
) -> Result<NormalizedTensor, PreprocessError> {
    check_stds(stds)?;
    check_means(means)?;
    let side = INPUT_SIDE as usize;
    let mut values = Vec::with_capacity(NormalizedTensor::LEN);
    for (c, chunk) in tensor.values.chunks_exact(side * side).enumerate() {
        for &v in chunk {
            values.push(v * stds[c] + means[c]);
        }
    }
    Ok(NormalizedTensor { values })
}

fn check_stds(stds: &[f64; 3]) -> Result<(), PreprocessError> {
    for (channel, &std) in stds.iter().enumerate() {
        if !(std > 0.0) || !std.is_finite() {
            return Err(PreprocessError::NonPositiveStd {
                channel,
                value: std,
            });
        }
    }
    Ok(())
}

fn check_means(means: &[f64; 3]) -> Result<(), PreprocessError> {
    match means.iter().find(|m| !m.is_finite()) {
        Some(&bad) => Err(PreprocessError::NonFiniteValue { value: bad }),
        None => Ok(()),
    }
}

/// Random stages of the training-time transform.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainTransformConfig {
    pub max_rotation_deg: f64,
    pub flip_probability: f64,
}

impl Default for TrainTransformConfig {
    fn default() -> Self {
        Self {
            max_rotation_deg: 20.0,
            flip_probability: 0.5,
        }
    }
}

/// Training transform: resize, random rotation, random mirror, scale,
/// standardize. Both draws are always consumed, so a zero rotation range or
/// flip probability changes the output but not the stream position.
pub fn train_transform(
    img: &GrayImage,
    cfg: &TrainTransformConfig,
    stream: &mut Stream,
) -> NormalizedTensor {
    let resized = resize_bilinear(img, INPUT_SIDE, INPUT_SIDE);
    let angle = rng::symmetric(stream, cfg.max_rotation_deg);
    let flip_draw = rng::unit(stream);
    let mut shaped = rotate(&resized, angle);
    if flip_draw < cfg.flip_probability {
        shaped = hflip(&shaped);
    }
    let unit = to_unit_tensor(&shaped);
    normalize(&unit, &CHANNEL_MEANS, &CHANNEL_STDS)
        .expect("standard deviations are positive constants")
}

/// Evaluation transform: resize, scale, standardize. No random stages.
pub fn eval_transform(img: &GrayImage) -> NormalizedTensor {
    let unit = to_unit_tensor(img);
    normalize(&unit, &CHANNEL_MEANS, &CHANNEL_STDS)
        .expect("standard deviations are positive constants")
}

#[derive(Clone, Debug, PartialEq)]
pub enum PreprocessError {
    WrongLength { expected: usize, actual: usize },
    NonFiniteValue { value: f64 },
    NonPositiveStd { channel: usize, value: f64 },
}

impl fmt::Display for PreprocessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PreprocessError::WrongLength { expected, actual } => {
                write!(f, "tensor needs {expected} values, got {actual}")
            }
            PreprocessError::NonFiniteValue { value } => {
                write!(f, "tensor value {value} is not finite")
            }
            PreprocessError::NonPositiveStd { channel, value } => {
                write!(f, "channel {channel} std must be positive, got {value}")
            }
        }
    }
}

impl core::error::Error for PreprocessError {}
