//! Test-only oracles and synthetic data for the radaug workspace.
//!
//! Nothing here is used by the shipping pipeline. The equalization
//! reference recomputes every pixel from the written definition without any
//! caching or shared helpers, so agreement with the production path is
//! meaningful evidence rather than a tautology.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use radaug_core::enhance::ClaheConfig;
use radaug_core::image::{GrayImage, Label};
use radaug_core::trainer::FeatureVector;

/// Brute-force clip-limited adaptive equalization.
///
/// For each output pixel this rebuilds the four neighboring tile maps from
/// scratch: tile histogram by direct iteration, cap-and-redistribute, CDF
/// map, then bilinear blending between tile centers with edge clamping.
/// Quadratic-ish and slow on purpose.
pub fn reference_clahe(img: &GrayImage, cfg: &ClaheConfig) -> GrayImage {
    let (w, h) = img.dimensions();
    assert!(w >= 2 && h >= 2, "reference needs at least 2x2 pixels");
    assert!(cfg.tiles_x >= 1 && cfg.tiles_y >= 1);
    assert!(cfg.clip_fraction > 0.0 && cfg.clip_fraction <= 1.0);
    assert!(cfg.n_bins >= 2);

    let tile_w = (w + cfg.tiles_x - 1) / cfg.tiles_x;
    let tile_h = (h + cfg.tiles_y - 1) / cfg.tiles_y;
    assert!(
        (cfg.tiles_x - 1) * tile_w < w && (cfg.tiles_y - 1) * tile_h < h,
        "grid leaves an empty tile"
    );

    let center_x = |tx: u32| -> f64 {
        let x0 = tx * tile_w;
        let width = tile_w.min(w - x0);
        x0 as f64 + (width as f64 - 1.0) / 2.0
    };
    let center_y = |ty: u32| -> f64 {
        let y0 = ty * tile_h;
        let height = tile_h.min(h - y0);
        y0 as f64 + (height as f64 - 1.0) / 2.0
    };

    // neighbor pair and blend weight along one axis, scanning centers
    let locate = |pos: f64, count: u32, center: &dyn Fn(u32) -> f64| -> (u32, u32, f64) {
        if pos <= center(0) {
            return (0, 0, 0.0);
        }
        let last = count - 1;
        if pos >= center(last) {
            return (last, last, 0.0);
        }
        let mut i = 0;
        while pos >= center(i + 1) {
            i += 1;
        }
        let weight = (pos - center(i)) / (center(i + 1) - center(i));
        (i, i + 1, weight)
    };

    // full map for one tile, rebuilt on every call
    let tile_map = |tx: u32, ty: u32| -> [u8; 256] {
        let x0 = tx * tile_w;
        let y0 = ty * tile_h;
        let tw = tile_w.min(w - x0);
        let th = tile_h.min(h - y0);

        let mut counts = vec![0u64; cfg.n_bins];
        for yy in y0..y0 + th {
            for xx in x0..x0 + tw {
                let v = img.get(xx, yy) as usize;
                counts[v * cfg.n_bins / 256] += 1;
            }
        }

        let area = tw as u64 * th as u64;
        let clip = {
            let raw = (cfg.clip_fraction * area as f64).round();
            if raw < 1.0 {
                1
            } else {
                raw as u64
            }
        };
        let mut excess = 0u64;
        for c in counts.iter_mut() {
            if *c > clip {
                excess += *c - clip;
                *c = clip;
            }
        }
        if excess > 0 {
            let batch = excess / cfg.n_bins as u64;
            if batch > 0 {
                for c in counts.iter_mut() {
                    *c += batch;
                }
            }
            let residual = (excess % cfg.n_bins as u64) as usize;
            if residual > 0 {
                let stride = cfg.n_bins / residual;
                for k in 0..residual {
                    counts[k * stride] += 1;
                }
            }
        }

        let total: u64 = counts.iter().sum();
        let mut cdf = Vec::with_capacity(cfg.n_bins);
        let mut running = 0u64;
        for &c in &counts {
            running += c;
            cdf.push(running);
        }
        let cdf_min = cdf.iter().copied().find(|&c| c > 0).unwrap_or(0);

        let mut map = [0u8; 256];
        if total == 0 || cdf_min == total {
            for (v, slot) in map.iter_mut().enumerate() {
                *slot = v as u8;
            }
            return map;
        }
        let denom = (total - cdf_min) as f64;
        for (v, slot) in map.iter_mut().enumerate() {
            let c = cdf[v * cfg.n_bins / 256] as f64;
            let scaled = (c - cdf_min as f64) / denom * 255.0;
            *slot = scaled.round().clamp(0.0, 255.0) as u8;
        }
        map
    };

    GrayImage::from_fn(w, h, |x, y| {
        let (left, right, wx) = locate(x as f64, cfg.tiles_x, &center_x);
        let (top, bottom, wy) = locate(y as f64, cfg.tiles_y, &center_y);
        let v = img.get(x, y) as usize;
        let tl = tile_map(left, top)[v] as f64;
        let tr = tile_map(right, top)[v] as f64;
        let bl = tile_map(left, bottom)[v] as f64;
        let br = tile_map(right, bottom)[v] as f64;
        let upper = (1.0 - wx) * tl + wx * tr;
        let lower = (1.0 - wx) * bl + wx * br;
        let value = (1.0 - wy) * upper + wy * lower;
        value.round() as u8
    })
    .expect("reference keeps dimensions")
}

/// Uniformly random image from a seeded stream.
pub fn random_image(width: u32, height: u32, seed: u64) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    GrayImage::from_fn(width, height, |_, _| rng.gen::<u8>()).expect("nonzero dimensions")
}

/// Synthetic radiograph stand-in: a noisy mid-gray field with vertical
/// bands whose amplitude depends on the class. Positive images carry
/// strong banding, negatives stay close to flat noise, and the ranges are
/// close enough that a linear model cannot separate them perfectly.
pub fn texture_image(label: Label, side: u32, rng: &mut ChaCha8Rng) -> GrayImage {
    let base: f64 = rng.gen_range(100.0..140.0);
    let amplitude: f64 = match label {
        Label::Covid => rng.gen_range(18.0..46.0),
        Label::Normal => rng.gen_range(0.0..12.0),
    };
    let phase: u32 = rng.gen_range(0..8);
    GrayImage::from_fn(side, side, |x, _| {
        let stripe = if ((x + phase) / 4) % 2 == 0 { 1.0 } else { -1.0 };
        let noise: f64 = rng.gen_range(-22.0..22.0);
        (base + amplitude * stripe + noise).round().clamp(0.0, 255.0) as u8
    })
    .expect("nonzero dimensions")
}

/// A labeled image split for end-to-end experiments.
pub struct TextureDataset {
    pub train: Vec<(GrayImage, Label)>,
    pub test: Vec<(GrayImage, Label)>,
}

/// Builds a two-texture dataset with the given class counts, all images
/// `side` by `side`, deterministic in `seed`.
pub fn texture_dataset(
    train_covid: usize,
    train_normal: usize,
    test_covid: usize,
    test_normal: usize,
    side: u32,
    seed: u64,
) -> TextureDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let take = |count: usize, label: Label, rng: &mut ChaCha8Rng| {
        (0..count)
            .map(|_| (texture_image(label, side, rng), label))
            .collect::<Vec<_>>()
    };
    let mut train = take(train_covid, Label::Covid, &mut rng);
    train.extend(take(train_normal, Label::Normal, &mut rng));
    let mut test = take(test_covid, Label::Covid, &mut rng);
    test.extend(take(test_normal, Label::Normal, &mut rng));
    TextureDataset { train, test }
}

/// Twenty linearly separable 8-dimensional points: positives jittered
/// around `+1` in every coordinate, negatives around `-1`. The all-ones
/// hyperplane through the origin splits them with a wide margin.
pub fn separable_features(seed: u64) -> Vec<FeatureVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(20);
    for i in 0..20 {
        let label = if i < 10 { Label::Covid } else { Label::Normal };
        let sign = if i < 10 { 1.0 } else { -1.0 };
        let values: Vec<f64> = (0..8)
            .map(|_| sign * (1.0 + rng.gen_range(-0.1..0.1)))
            .collect();
        out.push(FeatureVector {
            id: format!("point-{i}"),
            label,
            values,
        });
    }
    out
}
