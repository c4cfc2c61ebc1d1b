//! Histogram equalization: global, adaptive, and clip-limited adaptive.
//!
//! The clip-limited variant works on a grid of tiles. Each tile gets its own
//! clipped histogram and 256-entry lookup map; output pixels blend the maps
//! of the (up to) four nearest tile centers bilinearly, which removes the
//! block seams a naive per-tile equalization would leave. Pixels outside the
//! outermost centers clamp to the edge tile's map.
//!
//! Tile maps are independent of one another and pixels are pure functions of
//! the precomputed maps, so any evaluation order produces identical bytes.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::image::{GrayImage, Rect};

pub const DEFAULT_TILES: u32 = 8;
pub const DEFAULT_CLIP_FRACTION: f64 = 0.03;
pub const DEFAULT_BINS: usize = 256;

/// Tile-grid equalization settings.
///
/// `clip_fraction` is the per-tile histogram cap expressed as a fraction of
/// the tile's pixel count; 1.0 disables clipping. `n_bins` quantizes the
/// 8-bit intensity range into `floor(v * n_bins / 256)` buckets.
#[derive(Clone, Debug, PartialEq)]
pub struct ClaheConfig {
    pub tiles_x: u32,
    pub tiles_y: u32,
    pub clip_fraction: f64,
    pub n_bins: usize,
}

impl Default for ClaheConfig {
    fn default() -> Self {
        Self {
            tiles_x: DEFAULT_TILES,
            tiles_y: DEFAULT_TILES,
            clip_fraction: DEFAULT_CLIP_FRACTION,
            n_bins: DEFAULT_BINS,
        }
    }
}

impl ClaheConfig {
    /// Default grid with a custom clip fraction.
    pub fn with_clip(clip_fraction: f64) -> Self {
        Self {
            clip_fraction,
            ..Self::default()
        }
    }

    /// Same grid with clipping disabled.
    pub fn unclipped(&self) -> Self {
        Self {
            clip_fraction: 1.0,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<(), EnhanceError> {
        if self.tiles_x == 0 || self.tiles_y == 0 {
            return Err(EnhanceError::InvalidTileGrid {
                tiles_x: self.tiles_x,
                tiles_y: self.tiles_y,
            });
        }
        if !(self.clip_fraction > 0.0 && self.clip_fraction <= 1.0) {
            return Err(EnhanceError::InvalidClipFraction {
                value: self.clip_fraction,
            });
        }
        if self.n_bins < 2 {
            return Err(EnhanceError::InvalidBinCount {
                n_bins: self.n_bins,
            });
        }
        Ok(())
    }
}

/// Intensity histogram over quantized buckets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Histogram {
    counts: Vec<u64>,
}

impl Histogram {
    pub fn from_counts(counts: Vec<u64>) -> Self {
        debug_assert!(!counts.is_empty());
        Self { counts }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

fn bin_index(value: u8, n_bins: usize) -> usize {
    value as usize * n_bins / 256
}

/// Histogram of a rectangular region, quantized into `n_bins` buckets.
pub fn region_histogram(
    img: &GrayImage,
    region: Rect,
    n_bins: usize,
) -> Result<Histogram, EnhanceError> {
    if n_bins < 2 {
        return Err(EnhanceError::InvalidBinCount { n_bins });
    }
    if region.width == 0 || region.height == 0 {
        return Err(EnhanceError::EmptyRegion);
    }
    let (w, h) = img.dimensions();
    if region.x.checked_add(region.width).map_or(true, |r| r > w)
        || region.y.checked_add(region.height).map_or(true, |b| b > h)
    {
        return Err(EnhanceError::RegionOutOfBounds {
            region,
            width: w,
            height: h,
        });
    }
    let mut counts = vec![0u64; n_bins];
    for y in region.y..region.y + region.height {
        for x in region.x..region.x + region.width {
            counts[bin_index(img.get(x, y), n_bins)] += 1;
        }
    }
    Ok(Histogram::from_counts(counts))
}

/// Caps every bin at `clip_count` and hands the removed mass back: first an
/// equal share of `floor(excess / n_bins)` to every bin, then one unit each
/// to `excess % n_bins` bins spaced `floor(n_bins / residual)` apart starting
/// at bin 0. Redistributed bins may end above the cap; they are not
/// re-clipped. Total mass is preserved.
pub fn clip_and_redistribute(hist: &Histogram, clip_count: u64) -> Histogram {
    let clip = clip_count.max(1);
    let n_bins = hist.bins();
    let mut counts = hist.counts().to_vec();
    let mut excess: u64 = 0;
    for count in counts.iter_mut() {
        if *count > clip {
            excess += *count - clip;
            *count = clip;
        }
    }
    if excess > 0 {
        let batch = excess / n_bins as u64;
        if batch > 0 {
            for count in counts.iter_mut() {
                *count += batch;
            }
        }
        let residual = (excess % n_bins as u64) as usize;
        if residual > 0 {
            let stride = n_bins / residual;
            for k in 0..residual {
                counts[k * stride] += 1;
            }
        }
    }
    Histogram::from_counts(counts)
}

/// Equalization lookup for all 256 input intensities:
/// `m(v) = round((cdf(bin(v)) - cdf_min) / (total - cdf_min) * 255)` clamped
/// to `[0, 255]`, where `cdf_min` is the smallest nonzero CDF value. Empty
/// and constant histograms map to identity.
pub fn equalize_map(hist: &Histogram) -> [u8; 256] {
    let mut identity = [0u8; 256];
    for (v, slot) in identity.iter_mut().enumerate() {
        *slot = v as u8;
    }
    let total = hist.total();
    if total == 0 {
        return identity;
    }
    let mut cdf = Vec::with_capacity(hist.bins());
    let mut running = 0u64;
    for &count in hist.counts() {
        running += count;
        cdf.push(running);
    }
    let cdf_min = match cdf.iter().copied().find(|&c| c > 0) {
        Some(c) => c,
        None => return identity,
    };
    if cdf_min == total {
        // single populated bin: nothing to spread
        return identity;
    }
    let denom = (total - cdf_min) as f64;
    let mut map = [0u8; 256];
    let n_bins = hist.bins();
    for (v, slot) in map.iter_mut().enumerate() {
        let c = cdf[v * n_bins / 256] as f64;
        let scaled = (c - cdf_min as f64) / denom * 255.0;
        *slot = libm::round(scaled).clamp(0.0, 255.0) as u8;
    }
    map
}

/// Whole-image histogram equalization over 256 bins.
pub fn equalize_global(img: &GrayImage) -> GrayImage {
    let (w, h) = img.dimensions();
    let region = Rect {
        x: 0,
        y: 0,
        width: w,
        height: h,
    };
    let hist = region_histogram(img, region, DEFAULT_BINS)
        .expect("whole-image region is always valid");
    let map = equalize_map(&hist);
    apply_map(img, &map)
}

fn apply_map(img: &GrayImage, map: &[u8; 256]) -> GrayImage {
    let pixels = img.pixels().iter().map(|&p| map[p as usize]).collect();
    GrayImage::new(img.width(), img.height(), pixels)
        .expect("mapped image keeps its dimensions")
}

/// Clip-limited adaptive equalization over the configured tile grid.
pub fn clahe(img: &GrayImage, cfg: &ClaheConfig) -> Result<GrayImage, EnhanceError> {
    cfg.validate()?;
    let (w, h) = img.dimensions();
    if w < 2 || h < 2 {
        return Err(EnhanceError::ImageTooSmall {
            width: w,
            height: h,
        });
    }
    let grid = TileGrid::new(w, h, cfg.tiles_x, cfg.tiles_y)?;

    let mut maps = Vec::with_capacity((cfg.tiles_x * cfg.tiles_y) as usize);
    for ty in 0..cfg.tiles_y {
        for tx in 0..cfg.tiles_x {
            let rect = grid.tile_rect(tx, ty);
            let hist = region_histogram(img, rect, cfg.n_bins)?;
            let clip = clip_count(cfg.clip_fraction, rect.area());
            let clipped = clip_and_redistribute(&hist, clip);
            maps.push(equalize_map(&clipped));
        }
    }

    let centers_x = grid.centers_x();
    let centers_y = grid.centers_y();
    let column_spans: Vec<Span> = (0..w).map(|x| bracket(&centers_x, x as f64)).collect();

    let tiles_x = cfg.tiles_x as usize;
    let mut pixels = Vec::with_capacity(w as usize * h as usize);
    for y in 0..h {
        let row = bracket(&centers_y, y as f64);
        for x in 0..w {
            let col = &column_spans[x as usize];
            let v = img.get(x, y) as usize;
            let tl = maps[row.lo * tiles_x + col.lo][v] as f64;
            let tr = maps[row.lo * tiles_x + col.hi][v] as f64;
            let bl = maps[row.hi * tiles_x + col.lo][v] as f64;
            let br = maps[row.hi * tiles_x + col.hi][v] as f64;
            let top = (1.0 - col.weight) * tl + col.weight * tr;
            let bottom = (1.0 - col.weight) * bl + col.weight * br;
            let value = (1.0 - row.weight) * top + row.weight * bottom;
            pixels.push(libm::round(value) as u8);
        }
    }
    Ok(GrayImage::new(w, h, pixels).expect("output keeps input dimensions"))
}

/// Adaptive equalization without clip limiting: the same tile grid with the
/// cap effectively disabled.
pub fn ahe(img: &GrayImage, cfg: &ClaheConfig) -> Result<GrayImage, EnhanceError> {
    clahe(img, &cfg.unclipped())
}

/// Per-tile cap: `max(1, round(clip_fraction * tile_area))`.
fn clip_count(clip_fraction: f64, tile_area: u64) -> u64 {
    let raw = libm::round(clip_fraction * tile_area as f64);
    if raw < 1.0 {
        1
    } else {
        raw as u64
    }
}

/// Interpolation span between two tile indices: `lo == hi` with weight 0 in
/// the clamped border regions.
struct Span {
    lo: usize,
    hi: usize,
    weight: f64,
}

/// Finds the neighboring centers around `pos` and the blend weight toward
/// the upper one. Centers are strictly increasing.
fn bracket(centers: &[f64], pos: f64) -> Span {
    let last = centers.len() - 1;
    if pos <= centers[0] {
        return Span {
            lo: 0,
            hi: 0,
            weight: 0.0,
        };
    }
    if pos >= centers[last] {
        return Span {
            lo: last,
            hi: last,
            weight: 0.0,
        };
    }
    let mut i = 0;
    while pos >= centers[i + 1] {
        i += 1;
    }
    Span {
        lo: i,
        hi: i + 1,
        weight: (pos - centers[i]) / (centers[i + 1] - centers[i]),
    }
}

/// Ceil-partition of the raster into tiles. Interior tiles are
/// `ceil(w / tiles_x)` wide; the last tile in each direction takes the
/// remainder and is never empty.
struct TileGrid {
    width: u32,
    height: u32,
    tiles_x: u32,
    tiles_y: u32,
    tile_w: u32,
    tile_h: u32,
}

impl TileGrid {
    fn new(width: u32, height: u32, tiles_x: u32, tiles_y: u32) -> Result<Self, EnhanceError> {
        if tiles_x > width || tiles_y > height {
            return Err(EnhanceError::TileGridTooFine {
                tiles_x,
                tiles_y,
                width,
                height,
            });
        }
        let tile_w = width.div_ceil(tiles_x);
        let tile_h = height.div_ceil(tiles_y);
        // ceil partitioning can starve the last tile, e.g. 4 columns split
        // into 3 tiles of width 2 leaves nothing for the third
        if (tiles_x - 1) * tile_w >= width || (tiles_y - 1) * tile_h >= height {
            return Err(EnhanceError::TileGridTooFine {
                tiles_x,
                tiles_y,
                width,
                height,
            });
        }
        Ok(Self {
            width,
            height,
            tiles_x,
            tiles_y,
            tile_w,
            tile_h,
        })
    }

    fn tile_rect(&self, tx: u32, ty: u32) -> Rect {
        let x = tx * self.tile_w;
        let y = ty * self.tile_h;
        Rect {
            x,
            y,
            width: self.tile_w.min(self.width - x),
            height: self.tile_h.min(self.height - y),
        }
    }

    fn centers_x(&self) -> Vec<f64> {
        (0..self.tiles_x)
            .map(|tx| {
                let rect = self.tile_rect(tx, 0);
                rect.x as f64 + (rect.width as f64 - 1.0) / 2.0
            })
            .collect()
    }

    fn centers_y(&self) -> Vec<f64> {
        (0..self.tiles_y)
            .map(|ty| {
                let rect = self.tile_rect(0, ty);
                rect.y as f64 + (rect.height as f64 - 1.0) / 2.0
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum EnhanceError {
    EmptyRegion,
    RegionOutOfBounds {
        region: Rect,
        width: u32,
        height: u32,
    },
    InvalidBinCount {
        n_bins: usize,
    },
    InvalidClipFraction {
        value: f64,
    },
    InvalidTileGrid {
        tiles_x: u32,
        tiles_y: u32,
    },
    ImageTooSmall {
        width: u32,
        height: u32,
    },
    TileGridTooFine {
        tiles_x: u32,
        tiles_y: u32,
        width: u32,
        height: u32,
    },
}

impl fmt::Display for EnhanceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnhanceError::EmptyRegion => write!(f, "histogram region is empty"),
            EnhanceError::RegionOutOfBounds {
                region,
                width,
                height,
            } => write!(
                f,
                "region {}x{} at ({}, {}) exceeds image bounds {width}x{height}",
                region.width, region.height, region.x, region.y
            ),
            EnhanceError::InvalidBinCount { n_bins } => {
                write!(f, "histogram needs at least 2 bins, got {n_bins}")
            }
            EnhanceError::InvalidClipFraction { value } => {
                write!(f, "clip fraction must be in (0, 1], got {value}")
            }
            EnhanceError::InvalidTileGrid { tiles_x, tiles_y } => {
                write!(f, "tile grid {tiles_x}x{tiles_y} must be at least 1x1")
            }
            EnhanceError::ImageTooSmall { width, height } => {
                write!(f, "adaptive equalization needs at least 2x2 pixels, got {width}x{height}")
            }
            EnhanceError::TileGridTooFine {
                tiles_x,
                tiles_y,
                width,
                height,
            } => write!(
                f,
                "tile grid {tiles_x}x{tiles_y} leaves an empty tile on a {width}x{height} image"
            ),
        }
    }
}

impl core::error::Error for EnhanceError {}

#[cfg(test)]
mod tests {
    use super::*;

    fn hist(counts: &[u64]) -> Histogram {
        Histogram::from_counts(counts.to_vec())
    }

    #[test]
    fn redistribution_follows_the_stride_rule() {
        // cap at 4 -> [4,0,0,0], excess 6: +1 everywhere, then residual 2
        // lands on bins 0 and 2 (stride 4/2)
        let out = clip_and_redistribute(&hist(&[10, 0, 0, 0]), 4);
        assert_eq!(out.counts(), &[6, 1, 2, 1]);
        assert_eq!(out.total(), 10);
    }

    #[test]
    fn redistribution_without_excess_is_identity() {
        let h = hist(&[3, 1, 4, 1, 5]);
        assert_eq!(clip_and_redistribute(&h, 5), h);
    }

    #[test]
    fn redistribution_residual_only() {
        // cap at 2 -> [2,2,0,0], excess 2, batch 0, stride 2: bins 0 and 2
        let out = clip_and_redistribute(&hist(&[3, 3, 0, 0]), 2);
        assert_eq!(out.counts(), &[3, 2, 1, 0]);
        assert_eq!(out.total(), 6);
    }

    #[test]
    fn redistribution_preserves_mass_and_bounds_overshoot() {
        let h = hist(&[100, 0, 7, 55, 0, 0, 1, 9]);
        for clip in [1u64, 2, 5, 20, 100] {
            let out = clip_and_redistribute(&h, clip);
            assert_eq!(out.total(), h.total(), "clip {clip}");
            let excess: u64 = h
                .counts()
                .iter()
                .map(|&c| c.saturating_sub(clip))
                .sum();
            let cap = clip + excess / h.bins() as u64 + 1;
            assert!(
                out.counts().iter().all(|&c| c <= cap),
                "clip {clip}: {:?} exceeds {cap}",
                out.counts()
            );
        }
    }

    #[test]
    fn clip_count_rounds_and_floors_at_one() {
        assert_eq!(clip_count(0.03, 16), 1); // round(0.48) = 0, floored to 1
        assert_eq!(clip_count(0.03, 64 * 64), 123); // round(122.88)
        assert_eq!(clip_count(1.0, 16), 16);
        assert_eq!(clip_count(0.5, 3), 2); // round half away from zero
    }

    #[test]
    fn equalize_map_of_empty_histogram_is_identity() {
        let map = equalize_map(&hist(&[0, 0, 0, 0]));
        for v in 0..256 {
            assert_eq!(map[v] as usize, v);
        }
    }

    #[test]
    fn equalize_map_of_single_bin_is_identity() {
        let mut counts = vec![0u64; 256];
        counts[137] = 50;
        let map = equalize_map(&hist(&counts));
        assert_eq!(map[137], 137);
        assert_eq!(map[0], 0);
        assert_eq!(map[255], 255);
    }

    #[test]
    fn equalize_map_stretches_two_levels_to_full_range() {
        let mut counts = vec![0u64; 256];
        counts[10] = 3;
        counts[200] = 1;
        let map = equalize_map(&hist(&counts));
        assert_eq!(map[10], 0);
        assert_eq!(map[200], 255);
        // intensities below the first populated bin clamp to zero
        assert_eq!(map[0], 0);
        assert_eq!(map[255], 255);
    }

    #[test]
    fn equalize_map_is_monotonic() {
        let counts: Vec<u64> = (0..256).map(|i| (i * 7 % 23) as u64).collect();
        let map = equalize_map(&hist(&counts));
        for v in 1..256 {
            assert!(map[v] >= map[v - 1]);
        }
    }

    #[test]
    fn global_equalization_stretches_contrast() {
        let img = GrayImage::new(2, 2, vec![10, 10, 10, 200]).unwrap();
        let out = equalize_global(&img);
        assert_eq!(out.pixels(), &[0, 0, 0, 255]);
    }

    #[test]
    fn constant_image_is_fixed_by_global_equalization() {
        let img = GrayImage::filled(5, 4, 77).unwrap();
        assert_eq!(equalize_global(&img), img);
    }

    #[test]
    fn region_histogram_counts_the_region_only() {
        let img = GrayImage::from_fn(4, 4, |x, y| (y * 4 + x) as u8 * 16).unwrap();
        let rect = Rect {
            x: 2,
            y: 2,
            width: 2,
            height: 2,
        };
        let h = region_histogram(&img, rect, 256).unwrap();
        assert_eq!(h.total(), 4);
        assert_eq!(h.counts()[160], 1); // pixel (2,2) = 10*16
        assert_eq!(h.counts()[240], 1); // pixel (3,3) = 15*16
    }

    #[test]
    fn region_histogram_quantizes_bins() {
        let img = GrayImage::new(2, 1, vec![0, 255]).unwrap();
        let rect = Rect {
            x: 0,
            y: 0,
            width: 2,
            height: 1,
        };
        let h = region_histogram(&img, rect, 4).unwrap();
        assert_eq!(h.counts(), &[1, 0, 0, 1]); // 255*4/256 = 3
    }

    #[test]
    fn region_histogram_rejects_bad_regions() {
        let img = GrayImage::filled(4, 4, 0).unwrap();
        let empty = Rect {
            x: 0,
            y: 0,
            width: 0,
            height: 2,
        };
        assert_eq!(
            region_histogram(&img, empty, 256),
            Err(EnhanceError::EmptyRegion)
        );
        let oob = Rect {
            x: 3,
            y: 0,
            width: 2,
            height: 2,
        };
        assert!(matches!(
            region_histogram(&img, oob, 256),
            Err(EnhanceError::RegionOutOfBounds { .. })
        ));
    }

    #[test]
    fn clahe_rejects_undersized_images_and_oversized_grids() {
        let tiny = GrayImage::filled(1, 1, 0).unwrap();
        assert!(matches!(
            clahe(&tiny, &ClaheConfig::default()),
            Err(EnhanceError::ImageTooSmall { .. })
        ));

        let img = GrayImage::filled(4, 4, 0).unwrap();
        let cfg = ClaheConfig {
            tiles_x: 5,
            tiles_y: 1,
            ..ClaheConfig::default()
        };
        assert!(matches!(
            clahe(&img, &cfg),
            Err(EnhanceError::TileGridTooFine { .. })
        ));
    }

    #[test]
    fn clahe_rejects_grids_that_starve_the_last_tile() {
        // 4 columns over 3 tiles: interior width ceil(4/3) = 2, so tile 2
        // starts at column 4 and would be empty
        let img = GrayImage::filled(4, 4, 0).unwrap();
        let cfg = ClaheConfig {
            tiles_x: 3,
            tiles_y: 1,
            ..ClaheConfig::default()
        };
        assert!(matches!(
            clahe(&img, &cfg),
            Err(EnhanceError::TileGridTooFine { .. })
        ));
    }

    #[test]
    fn clahe_validates_config() {
        let img = GrayImage::filled(8, 8, 0).unwrap();
        let bad_clip = ClaheConfig {
            clip_fraction: 0.0,
            ..ClaheConfig::default()
        };
        assert!(matches!(
            clahe(&img, &bad_clip),
            Err(EnhanceError::InvalidClipFraction { .. })
        ));
        let bad_bins = ClaheConfig {
            n_bins: 1,
            ..ClaheConfig::default()
        };
        assert!(matches!(
            clahe(&img, &bad_bins),
            Err(EnhanceError::InvalidBinCount { .. })
        ));
    }

    #[test]
    fn single_tile_unclipped_matches_global_equalization() {
        let img = GrayImage::from_fn(16, 16, |x, y| ((x * 17 + y * 31) % 256) as u8).unwrap();
        let cfg = ClaheConfig {
            tiles_x: 1,
            tiles_y: 1,
            clip_fraction: 1.0,
            n_bins: 256,
        };
        assert_eq!(clahe(&img, &cfg).unwrap(), equalize_global(&img));
    }

    #[test]
    fn ahe_is_clahe_without_clipping() {
        let img = GrayImage::from_fn(16, 16, |x, y| ((x * 5 + y * 13) % 256) as u8).unwrap();
        let cfg = ClaheConfig {
            tiles_x: 2,
            tiles_y: 2,
            clip_fraction: 0.03,
            n_bins: 256,
        };
        assert_eq!(ahe(&img, &cfg).unwrap(), clahe(&img, &cfg.unclipped()).unwrap());
    }

    #[test]
    fn constant_image_stays_constant_under_clahe() {
        let img = GrayImage::filled(16, 16, 200).unwrap();
        // clipping spreads a flat tile's mass to other bins, so the level
        // may shift, but every tile sees the same histogram and the output
        // must stay flat
        let out = clahe(&img, &ClaheConfig::default()).unwrap();
        let first = out.pixels()[0];
        assert!(out.pixels().iter().all(|&p| p == first));
        // without clipping the single-bin map is identity
        let unclipped = clahe(&img, &ClaheConfig::default().unclipped()).unwrap();
        assert_eq!(unclipped, img);
    }

    #[test]
    fn bracket_clamps_outside_the_center_range() {
        let centers = [1.5, 5.5, 9.5];
        let below = bracket(&centers, 0.0);
        assert_eq!((below.lo, below.hi), (0, 0));
        assert_eq!(below.weight, 0.0);
        let above = bracket(&centers, 11.0);
        assert_eq!((above.lo, above.hi), (2, 2));
        assert_eq!(above.weight, 0.0);
        let mid = bracket(&centers, 3.5);
        assert_eq!((mid.lo, mid.hi), (0, 1));
        assert!((mid.weight - 0.5).abs() < 1e-12);
    }
}
