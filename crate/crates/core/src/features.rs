//! Backbone-free baseline feature extractor.
//!
//! The descriptor concatenates a 16x16 bilinear thumbnail scaled to
//! `[0, 1]` with a 32-bin normalized intensity histogram of the original
//! image, giving 288 values. It is deliberately simple: enough signal for
//! the linear head to separate texture classes while keeping the pipeline
//! free of external model weights.

use alloc::vec::Vec;

use crate::image::GrayImage;
use crate::preprocess::resize_bilinear;

pub const THUMBNAIL_SIDE: u32 = 16;
pub const HISTOGRAM_BINS: usize = 32;
/// Total descriptor length: 16*16 + 32.
pub const BASELINE_DIM: usize =
    (THUMBNAIL_SIDE as usize) * (THUMBNAIL_SIDE as usize) + HISTOGRAM_BINS;

/// Extracts the 288-value baseline descriptor.
pub fn extract_baseline_features(img: &GrayImage) -> Vec<f64> {
    let mut values = Vec::with_capacity(BASELINE_DIM);
    let thumb = resize_bilinear(img, THUMBNAIL_SIDE, THUMBNAIL_SIDE);
    values.extend(thumb.pixels().iter().map(|&p| p as f64 / 255.0));

    let mut hist = [0u64; HISTOGRAM_BINS];
    for &p in img.pixels() {
        hist[p as usize * HISTOGRAM_BINS / 256] += 1;
    }
    let total = img.pixels().len() as f64;
    values.extend(hist.iter().map(|&c| c as f64 / total));
    values
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn descriptor_has_fixed_length() {
        let small = GrayImage::filled(3, 5, 9).unwrap();
        let large = GrayImage::filled(300, 200, 9).unwrap();
        assert_eq!(extract_baseline_features(&small).len(), BASELINE_DIM);
        assert_eq!(extract_baseline_features(&large).len(), BASELINE_DIM);
        assert_eq!(BASELINE_DIM, 288);
    }

    #[test]
    fn black_image_maps_to_zero_thumbnail_and_first_bin() {
        let img = GrayImage::filled(20, 20, 0).unwrap();
        let v = extract_baseline_features(&img);
        assert!(v[..256].iter().all(|&x| x == 0.0));
        assert_eq!(v[256], 1.0);
        assert!(v[257..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn white_image_maps_to_unit_thumbnail_and_last_bin() {
        let img = GrayImage::filled(20, 20, 255).unwrap();
        let v = extract_baseline_features(&img);
        assert!(v[..256].iter().all(|&x| x == 1.0));
        assert_eq!(v[256 + 31], 1.0);
        assert!(v[256..256 + 31].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn histogram_part_sums_to_one() {
        let img = GrayImage::from_fn(33, 17, |x, y| ((x * 29 + y * 57) % 256) as u8).unwrap();
        let v = extract_baseline_features(&img);
        let sum: f64 = v[256..].iter().sum();
        assert!((sum - 1.0).abs() < 1e-9);
        assert!(v.iter().all(|&x| (0.0..=1.0).contains(&x)));
    }

    #[test]
    fn histogram_reflects_the_original_resolution() {
        // a single bright pixel vanishes from the 16x16 thumbnail of a
        // large image but must still appear in the histogram
        let img = GrayImage::from_fn(128, 128, |x, y| {
            if x == 77 && y == 33 {
                255
            } else {
                0
            }
        })
        .unwrap();
        let v = extract_baseline_features(&img);
        let expected = 1.0 / (128.0 * 128.0);
        assert!((v[256 + 31] - expected).abs() < 1e-15);
    }

    #[test]
    fn identical_images_give_identical_features() {
        let img = GrayImage::from_fn(40, 30, |x, y| ((x + y * y) % 256) as u8).unwrap();
        assert_eq!(
            extract_baseline_features(&img),
            extract_baseline_features(&img.clone())
        );
    }
}
