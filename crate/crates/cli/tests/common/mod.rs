//! Helpers shared by the integration suites: synthetic datasets written to
//! disk as PGM files plus a manifest.

use std::fs;
use std::path::{Path, PathBuf};

use radaug::io::save_image;
use radaug_testkit::texture_dataset;

/// Writes a two-texture dataset under `dir/imgs/` and returns the path of
/// the manifest that indexes it (entry paths relative to the manifest).
pub fn write_texture_manifest(
    dir: &Path,
    train_covid: usize,
    train_normal: usize,
    test_covid: usize,
    test_normal: usize,
    side: u32,
    seed: u64,
) -> PathBuf {
    let ds = texture_dataset(train_covid, train_normal, test_covid, test_normal, side, seed);
    let imgs = dir.join("imgs");
    fs::create_dir_all(&imgs).unwrap();

    let mut rows = String::from("path,label,split\n");
    for (i, (img, label)) in ds.train.iter().enumerate() {
        let name = format!("train_{i:04}.pgm");
        save_image(img, &imgs.join(&name)).unwrap();
        rows.push_str(&format!("imgs/{name},{},train\n", label.as_str()));
    }
    for (i, (img, label)) in ds.test.iter().enumerate() {
        let name = format!("test_{i:04}.pgm");
        save_image(img, &imgs.join(&name)).unwrap();
        rows.push_str(&format!("imgs/{name},{},test\n", label.as_str()));
    }

    let manifest_path = dir.join("manifest.csv");
    fs::write(&manifest_path, rows).unwrap();
    manifest_path
}
