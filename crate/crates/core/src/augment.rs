//! Seeded geometric augmentation and minority-class balancing.
//!
//! Each synthetic sample applies, in order: rotation about the image center,
//! fractional translation, an optional horizontal flip, then clip-limited
//! equalization. Geometry fills uncovered pixels with the nearest edge
//! value. Draws for one sample come from a per-sample stream derived from
//! the configured seed, so sample `j` is reproducible on its own no matter
//! how the batch is scheduled.

use alloc::vec::Vec;
use core::fmt;

use crate::enhance::{clahe, ClaheConfig, EnhanceError};
use crate::image::{bilinear_sample, GrayImage};
use crate::rng::{self, Stream};

/// Augmentation ranges plus the balancing target.
///
/// Rotation angles are drawn from `[-max_rotation_deg, max_rotation_deg)`
/// and shifts from the symmetric fractional ranges. `target_count` is the
/// desired class size after balancing, originals included.
#[derive(Clone, Debug, PartialEq)]
pub struct AugmentConfig {
    pub max_rotation_deg: f64,
    pub width_shift_fraction: f64,
    pub height_shift_fraction: f64,
    pub horizontal_flip: bool,
    pub clahe: ClaheConfig,
    pub seed: u64,
    pub target_count: usize,
}

impl AugmentConfig {
    /// Standard ranges: rotation up to 20 degrees, shifts up to 1% of each
    /// dimension, flips enabled, default equalization grid.
    pub fn new(seed: u64, target_count: usize) -> Self {
        Self {
            max_rotation_deg: 20.0,
            width_shift_fraction: 0.01,
            height_shift_fraction: 0.01,
            horizontal_flip: true,
            clahe: ClaheConfig::default(),
            seed,
            target_count,
        }
    }

    pub fn validate(&self) -> Result<(), AugmentError> {
        if !(0.0..360.0).contains(&self.max_rotation_deg) {
            return Err(AugmentError::InvalidRotation {
                value: self.max_rotation_deg,
            });
        }
        if !(0.0..1.0).contains(&self.width_shift_fraction)
            || !(0.0..1.0).contains(&self.height_shift_fraction)
        {
            return Err(AugmentError::InvalidShift {
                dx: self.width_shift_fraction,
                dy: self.height_shift_fraction,
            });
        }
        self.clahe.validate().map_err(AugmentError::Enhance)
    }
}

/// Rotates about the image center `((w-1)/2, (h-1)/2)` by `angle_deg`
/// degrees, sampling the source bilinearly through the inverse map and
/// clamping reads to the nearest edge.
pub fn rotate(img: &GrayImage, angle_deg: f64) -> GrayImage {
    let theta = angle_deg.to_radians();
    let sin = libm::sin(theta);
    let cos = libm::cos(theta);
    let (w, h) = img.dimensions();
    let cx = (w as f64 - 1.0) / 2.0;
    let cy = (h as f64 - 1.0) / 2.0;
    GrayImage::from_fn(w, h, |x, y| {
        let dx = x as f64 - cx;
        let dy = y as f64 - cy;
        let sx = cx + cos * dx + sin * dy;
        let sy = cy - sin * dx + cos * dy;
        bilinear_sample(img, sx, sy)
    })
    .expect("rotation keeps dimensions")
}

/// Shifts by `round(fraction * dimension)` whole pixels, replicating the
/// nearest edge into uncovered areas.
pub fn translate(img: &GrayImage, dx_fraction: f64, dy_fraction: f64) -> GrayImage {
    let (w, h) = img.dimensions();
    let shift_x = libm::round(dx_fraction * w as f64) as i64;
    let shift_y = libm::round(dy_fraction * h as f64) as i64;
    GrayImage::from_fn(w, h, |x, y| {
        let sx = (x as i64 - shift_x).clamp(0, w as i64 - 1) as u32;
        let sy = (y as i64 - shift_y).clamp(0, h as i64 - 1) as u32;
        img.get(sx, sy)
    })
    .expect("translation keeps dimensions")
}

/// Mirrors the image left to right.
pub fn hflip(img: &GrayImage) -> GrayImage {
    let (w, h) = img.dimensions();
    GrayImage::from_fn(w, h, |x, y| img.get(w - 1 - x, y))
        .expect("flip keeps dimensions")
}

/// Draws one augmented variant. Consumes exactly four draws (angle, x shift,
/// y shift, flip) before applying the enhancement step, so a disabled stage
/// still advances the stream identically.
pub fn augment_one(
    img: &GrayImage,
    cfg: &AugmentConfig,
    stream: &mut Stream,
) -> Result<GrayImage, EnhanceError> {
    let angle = rng::symmetric(stream, cfg.max_rotation_deg);
    let dx = rng::symmetric(stream, cfg.width_shift_fraction);
    let dy = rng::symmetric(stream, cfg.height_shift_fraction);
    let flip_draw = rng::unit(stream);
    let mut out = rotate(img, angle);
    out = translate(&out, dx, dy);
    if cfg.horizontal_flip && flip_draw < 0.5 {
        out = hflip(&out);
    }
    clahe(&out, &cfg.clahe)
}

/// Grows a class to `cfg.target_count` images. The originals come first,
/// untouched; synthetic sample `j` augments source `j % n` using the stream
/// seeded with `cfg.seed ^ j`.
pub fn balance_class(
    imgs: &[GrayImage],
    cfg: &AugmentConfig,
) -> Result<Vec<GrayImage>, AugmentError> {
    cfg.validate()?;
    if imgs.is_empty() {
        return Err(AugmentError::EmptyInput);
    }
    if cfg.target_count < imgs.len() {
        return Err(AugmentError::TargetBelowInput {
            target: cfg.target_count,
            inputs: imgs.len(),
        });
    }
    let mut out = imgs.to_vec();
    out.reserve(cfg.target_count - imgs.len());
    for j in 0..cfg.target_count - imgs.len() {
        let source = &imgs[j % imgs.len()];
        let mut stream = rng::stream(cfg.seed ^ j as u64);
        let sample = augment_one(source, cfg, &mut stream).map_err(AugmentError::Enhance)?;
        out.push(sample);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub enum AugmentError {
    EmptyInput,
    TargetBelowInput { target: usize, inputs: usize },
    InvalidRotation { value: f64 },
    InvalidShift { dx: f64, dy: f64 },
    Enhance(EnhanceError),
}

impl fmt::Display for AugmentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AugmentError::EmptyInput => write!(f, "cannot balance an empty class"),
            AugmentError::TargetBelowInput { target, inputs } => {
                write!(f, "target count {target} is below the {inputs} input images")
            }
            AugmentError::InvalidRotation { value } => {
                write!(f, "max rotation must be in [0, 360) degrees, got {value}")
            }
            AugmentError::InvalidShift { dx, dy } => {
                write!(f, "shift fractions must be in [0, 1), got ({dx}, {dy})")
            }
            AugmentError::Enhance(e) => write!(f, "enhancement failed: {e}"),
        }
    }
}

impl core::error::Error for AugmentError {}
