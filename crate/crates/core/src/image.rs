//! Grayscale raster primitives shared by every pipeline stage.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Single-channel 8-bit image stored row-major, top-left origin.
#[derive(Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl fmt::Debug for GrayImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GrayImage")
            .field("width", &self.width)
            .field("height", &self.height)
            .finish_non_exhaustive()
    }
}

impl GrayImage {
    /// Wraps raw row-major pixels. The pixel count must match the
    /// dimensions exactly.
    pub fn new(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self, ImageError> {
        if width == 0 || height == 0 {
            return Err(ImageError::EmptyDimensions { width, height });
        }
        let expected = width as usize * height as usize;
        if pixels.len() != expected {
            return Err(ImageError::PixelCountMismatch {
                expected,
                actual: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Constant-valued image.
    pub fn filled(width: u32, height: u32, value: u8) -> Result<Self, ImageError> {
        if width == 0 || height == 0 {
            return Err(ImageError::EmptyDimensions { width, height });
        }
        Ok(Self {
            width,
            height,
            pixels: vec![value; width as usize * height as usize],
        })
    }

    /// Builds an image by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(
        width: u32,
        height: u32,
        mut f: impl FnMut(u32, u32) -> u8,
    ) -> Result<Self, ImageError> {
        if width == 0 || height == 0 {
            return Err(ImageError::EmptyDimensions { width, height });
        }
        let mut pixels = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    /// Row-major pixel data.
    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    /// Pixel at `(x, y)`. Panics if the coordinate is out of bounds.
    pub fn get(&self, x: u32, y: u32) -> u8 {
        debug_assert!(x < self.width && y < self.height);
        self.pixels[y as usize * self.width as usize + x as usize]
    }
}

/// Bilinear sample at fractional coordinates with nearest-edge clamping:
/// neighbor indices are clamped into the raster while the interpolation
/// fractions are kept, so out-of-bounds reads replicate the border.
pub(crate) fn bilinear_sample(img: &GrayImage, sx: f64, sy: f64) -> u8 {
    let x0 = libm::floor(sx);
    let y0 = libm::floor(sy);
    let fx = sx - x0;
    let fy = sy - y0;
    let max_x = (img.width - 1) as i64;
    let max_y = (img.height - 1) as i64;
    let cx0 = (x0 as i64).clamp(0, max_x) as u32;
    let cx1 = (x0 as i64 + 1).clamp(0, max_x) as u32;
    let cy0 = (y0 as i64).clamp(0, max_y) as u32;
    let cy1 = (y0 as i64 + 1).clamp(0, max_y) as u32;
    let v00 = img.get(cx0, cy0) as f64;
    let v01 = img.get(cx1, cy0) as f64;
    let v10 = img.get(cx0, cy1) as f64;
    let v11 = img.get(cx1, cy1) as f64;
    let top = (1.0 - fx) * v00 + fx * v01;
    let bottom = (1.0 - fx) * v10 + fx * v11;
    let value = (1.0 - fy) * top + fy * bottom;
    libm::round(value).clamp(0.0, 255.0) as u8
}

/// Axis-aligned pixel region, inclusive of `(x, y)` and spanning
/// `width * height` pixels.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rect {
    pub x: u32,
    pub y: u32,
    pub width: u32,
    pub height: u32,
}

impl Rect {
    pub fn area(&self) -> u64 {
        self.width as u64 * self.height as u64
    }
}

/// Two-class ground-truth label. `Covid` is the positive class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Label {
    Covid,
    Normal,
}

impl Label {
    /// Canonical lowercase token used by manifests and feature files.
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Covid => "covid",
            Label::Normal => "normal",
        }
    }

    /// Parses the closed label vocabulary; anything else is `None`.
    pub fn parse(token: &str) -> Option<Self> {
        match token {
            "covid" => Some(Label::Covid),
            "normal" => Some(Label::Normal),
            _ => None,
        }
    }

    /// Class index used by the classifier head: covid 0, normal 1.
    pub fn class_index(self) -> usize {
        match self {
            Label::Covid => 0,
            Label::Normal => 1,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ImageError {
    EmptyDimensions { width: u32, height: u32 },
    PixelCountMismatch { expected: usize, actual: usize },
}

impl fmt::Display for ImageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ImageError::EmptyDimensions { width, height } => {
                write!(f, "image dimensions {width}x{height} are empty")
            }
            ImageError::PixelCountMismatch { expected, actual } => {
                write!(f, "expected {expected} pixels, got {actual}")
            }
        }
    }
}

impl core::error::Error for ImageError {}
