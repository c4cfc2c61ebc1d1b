//! End-to-end orchestration: class balancing via augmentation, feature
//! extraction, the epochs sweep with train/evaluate rounds, and the result
//! table persisted as CSV.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use radaug_core::augment::balance_class;
use radaug_core::features::extract_baseline_features;
use radaug_core::image::{GrayImage, Label};
use radaug_core::metrics::ConfusionMatrix;
use radaug_core::trainer::{predict, train, FeatureVector};

use crate::config::RunConfig;
use crate::error::Error;
use crate::feature_file;
use crate::io::{load_image, save_image};
use crate::manifest::{resolve_entry_path, Manifest, ManifestEntry, Split};
use crate::model::{EpochRecord, ModelFile};
use crate::report;

pub const RESULTS_HEADER: &str =
    "epochs,tp,fn,fp,tn,sensitivity,specificity,accuracy,mcc,mcc_degenerate";

/// One evaluated sweep point. Undefined rates (empty denominator) are kept
/// as `None` and serialized as `nan`.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub epochs: usize,
    pub true_positives: u64,
    pub false_negatives: u64,
    pub false_positives: u64,
    pub true_negatives: u64,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub accuracy: Option<f64>,
    pub mcc: f64,
    pub mcc_degenerate: bool,
}

impl ResultRow {
    pub fn from_confusion(epochs: usize, cm: &ConfusionMatrix) -> Self {
        let mcc = cm.mcc();
        Self {
            epochs,
            true_positives: cm.true_positives,
            false_negatives: cm.false_negatives,
            false_positives: cm.false_positives,
            true_negatives: cm.true_negatives,
            sensitivity: cm.sensitivity().ok(),
            specificity: cm.specificity().ok(),
            accuracy: cm.accuracy().ok(),
            mcc: mcc.value,
            mcc_degenerate: mcc.degenerate,
        }
    }
}

fn rate_field(value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{v}"),
        None => "nan".into(),
    }
}

fn parse_rate(field: &str) -> Result<Option<f64>, ()> {
    if field == "nan" {
        return Ok(None);
    }
    match field.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Some(v)),
        _ => Err(()),
    }
}

pub fn results_to_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from(RESULTS_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.epochs,
            r.true_positives,
            r.false_negatives,
            r.false_positives,
            r.true_negatives,
            rate_field(r.sensitivity),
            rate_field(r.specificity),
            rate_field(r.accuracy),
            r.mcc,
            r.mcc_degenerate
        ));
    }
    out
}

pub fn results_from_csv(text: &str) -> Result<Vec<ResultRow>, Error> {
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header == RESULTS_HEADER => {}
        Some(header) => {
            return Err(Error::Invalid(format!(
                "results header must be `{RESULTS_HEADER}`, got `{header}`"
            )))
        }
        None => return Err(Error::Invalid("results file is empty".into())),
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let lineno = i + 2;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 10 {
            return Err(Error::Invalid(format!(
                "results line {lineno}: expected 10 fields, got {}",
                fields.len()
            )));
        }
        let bad = |what: &str| Error::Invalid(format!("results line {lineno}: bad {what}"));
        rows.push(ResultRow {
            epochs: fields[0].parse().map_err(|_| bad("epochs"))?,
            true_positives: fields[1].parse().map_err(|_| bad("tp"))?,
            false_negatives: fields[2].parse().map_err(|_| bad("fn"))?,
            false_positives: fields[3].parse().map_err(|_| bad("fp"))?,
            true_negatives: fields[4].parse().map_err(|_| bad("tn"))?,
            sensitivity: parse_rate(fields[5]).map_err(|_| bad("sensitivity"))?,
            specificity: parse_rate(fields[6]).map_err(|_| bad("specificity"))?,
            accuracy: parse_rate(fields[7]).map_err(|_| bad("accuracy"))?,
            mcc: fields[8].parse().map_err(|_| bad("mcc"))?,
            mcc_degenerate: fields[9].parse().map_err(|_| bad("mcc_degenerate"))?,
        });
    }
    Ok(rows)
}

pub fn write_results(path: &Path, rows: &[ResultRow]) -> Result<(), Error> {
    fs::write(path, results_to_csv(rows)).map_err(|e| Error::io(path, e))
}

pub fn read_results(path: &Path) -> Result<Vec<ResultRow>, Error> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    results_from_csv(&text).map_err(|e| match e {
        Error::Invalid(msg) => Error::format(path, msg),
        other => other,
    })
}

struct LoadedClass {
    entries: Vec<ManifestEntry>,
    images: Vec<GrayImage>,
}

fn load_split_class(
    manifest: &Manifest,
    manifest_path: &Path,
    split: Split,
    label: Label,
) -> Result<LoadedClass, Error> {
    let mut entries = Vec::new();
    let mut images = Vec::new();
    for entry in manifest.split_entries(split) {
        if entry.label != label {
            continue;
        }
        let resolved = resolve_entry_path(manifest_path, &entry.path);
        images.push(load_image(&resolved)?);
        entries.push(entry.clone());
    }
    Ok(LoadedClass { entries, images })
}

fn absolutized(manifest_path: &Path, entry: &ManifestEntry) -> ManifestEntry {
    ManifestEntry {
        path: resolve_entry_path(manifest_path, &entry.path)
            .to_string_lossy()
            .into_owned(),
        label: entry.label,
        split: entry.split,
    }
}

/// Balances the train positives by writing synthetic variants under
/// `out_dir/augmented/` and emitting `out_dir/manifest.csv`. Only the
/// positive (covid) training class is ever synthesized; negatives and the
/// whole test split pass through untouched.
///
/// The default per-class target is the train-split majority count; a
/// configured `target_count` overrides it. Original images are never
/// rewritten; their rows keep the source locations (absolutized so the new
/// manifest is valid anywhere) while synthetic rows are relative to the
/// emitted manifest. On failure the partial output is removed.
///
/// With augmentation disabled nothing is written and the original manifest
/// is returned unchanged.
pub fn cmd_augment(
    manifest_path: &Path,
    out_dir: &Path,
    cfg: &RunConfig,
) -> Result<(PathBuf, Manifest), Error> {
    let manifest = Manifest::load(manifest_path)?;
    if !cfg.augment_enabled {
        return Ok((manifest_path.to_path_buf(), manifest));
    }

    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let out_manifest_path = out_dir.join("manifest.csv");
    let augmented_dir = out_dir.join("augmented");
    if augmented_dir.exists() {
        fs::remove_dir_all(&augmented_dir).map_err(|e| Error::io(&augmented_dir, e))?;
    }
    fs::create_dir_all(&augmented_dir).map_err(|e| Error::io(&augmented_dir, e))?;

    let build = || -> Result<Vec<ManifestEntry>, Error> {
        let mut rows: Vec<ManifestEntry> = Vec::new();
        let positives = load_split_class(&manifest, manifest_path, Split::Train, Label::Covid)?;
        let n = positives.images.len();
        let (covid_n, normal_n) = manifest.class_counts(Split::Train);
        let target = cfg
            .augment
            .target_count
            .unwrap_or(covid_n.max(normal_n))
            .max(n);

        for entry in &positives.entries {
            rows.push(absolutized(manifest_path, entry));
        }
        if n > 0 && target > n {
            let aug_cfg = cfg.augment.to_core(cfg.seed, target);
            let balanced = balance_class(&positives.images, &aug_cfg)?;
            for (j, img) in balanced.iter().enumerate().skip(n) {
                let name = format!("covid_{j:05}.pgm");
                let file_path = augmented_dir.join(&name);
                save_image(img, &file_path)?;
                rows.push(ManifestEntry {
                    path: format!("augmented/{name}"),
                    label: Label::Covid,
                    split: Split::Train,
                });
            }
        }
        for entry in manifest.split_entries(Split::Train) {
            if entry.label == Label::Normal {
                rows.push(absolutized(manifest_path, entry));
            }
        }
        for entry in manifest.split_entries(Split::Test) {
            rows.push(absolutized(manifest_path, entry));
        }
        Ok(rows)
    };

    let write = || -> Result<Manifest, Error> {
        let out_manifest = Manifest::new(build()?)?;
        out_manifest.save(&out_manifest_path)?;
        Ok(out_manifest)
    };
    match write() {
        Ok(out_manifest) => Ok((out_manifest_path, out_manifest)),
        Err(e) => {
            let _ = fs::remove_dir_all(&augmented_dir);
            let _ = fs::remove_file(&out_manifest_path);
            Err(e)
        }
    }
}

/// Extracts baseline features for every manifest entry, split into
/// train and test tables. Row ids are the manifest path strings.
pub fn cmd_featurize(
    manifest: &Manifest,
    manifest_path: &Path,
) -> Result<(Vec<FeatureVector>, Vec<FeatureVector>), Error> {
    let mut train_rows = Vec::new();
    let mut test_rows = Vec::new();
    for entry in manifest.entries() {
        let resolved = resolve_entry_path(manifest_path, &entry.path);
        let img = load_image(&resolved)?;
        let row = FeatureVector {
            id: entry.path.clone(),
            label: entry.label,
            values: extract_baseline_features(&img),
        };
        match entry.split {
            Split::Train => train_rows.push(row),
            Split::Test => test_rows.push(row),
        }
    }
    Ok((train_rows, test_rows))
}

/// Trains a fresh head for the given epoch budget and evaluates it on the
/// test rows.
pub fn cmd_train_eval(
    train_rows: &[FeatureVector],
    test_rows: &[FeatureVector],
    cfg: &RunConfig,
    epochs: usize,
) -> Result<(ResultRow, ModelFile), Error> {
    let train_cfg = cfg.train.to_core(epochs, cfg.seed);
    let (head, log) = train(train_rows, &train_cfg)?;
    let mut predictions = Vec::with_capacity(test_rows.len());
    let mut truths = Vec::with_capacity(test_rows.len());
    for row in test_rows {
        let (label, _) = predict(&head, row)?;
        predictions.push(label);
        truths.push(row.label);
    }
    let cm = ConfusionMatrix::from_predictions(&predictions, &truths)?;
    Ok((
        ResultRow::from_confusion(epochs, &cm),
        ModelFile::from_head(&head, &train_cfg, &log),
    ))
}

/// Everything needed to re-execute a run bit-identically: the tool
/// version, the full effective configuration, and the per-sweep outcomes.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunRecord {
    pub tool_version: String,
    pub seed: u64,
    pub augment_enabled: bool,
    pub config: RunConfig,
    pub train_counts: ClassCounts,
    pub test_counts: ClassCounts,
    pub feature_dim: usize,
    pub epochs_sweep: Vec<usize>,
    pub results: Vec<RunRecordRow>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassCounts {
    pub covid: usize,
    pub normal: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunRecordRow {
    pub epochs: usize,
    pub tp: u64,
    #[serde(rename = "fn")]
    pub false_negatives: u64,
    pub fp: u64,
    pub tn: u64,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub accuracy: Option<f64>,
    pub mcc: f64,
    pub mcc_degenerate: bool,
    pub final_mean_loss: Option<f64>,
    pub final_learning_rate: Option<f64>,
}

fn record_row(row: &ResultRow, log: &[EpochRecord]) -> RunRecordRow {
    RunRecordRow {
        epochs: row.epochs,
        tp: row.true_positives,
        false_negatives: row.false_negatives,
        fp: row.false_positives,
        tn: row.true_negatives,
        sensitivity: row.sensitivity,
        specificity: row.specificity,
        accuracy: row.accuracy,
        mcc: row.mcc,
        mcc_degenerate: row.mcc_degenerate,
        final_mean_loss: log.last().map(|e| e.mean_loss),
        final_learning_rate: log.last().map(|e| e.learning_rate),
    }
}

fn count_labels(rows: &[FeatureVector]) -> ClassCounts {
    let covid = rows.iter().filter(|r| r.label == Label::Covid).count();
    ClassCounts {
        covid,
        normal: rows.len() - covid,
    }
}

/// Full pipeline: augment, featurize, sweep the epoch grid, and write
/// every artifact under `out_dir`:
///
/// - `manifest.csv` plus `augmented/*.pgm` when augmentation runs
/// - `features_train.csv` and `features_test.csv`
/// - `model_{epochs}.json` per sweep point
/// - `results.csv` and `run_record.json`
/// - `report/` with the summary table and metric charts
pub fn run_all(cfg: &RunConfig, manifest_path: &Path, out_dir: &Path) -> Result<(), Error> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let (train_rows, test_rows) = match (&cfg.features_train, &cfg.features_test) {
        (Some(train_path), Some(test_path)) => {
            (feature_file::read(train_path)?, feature_file::read(test_path)?)
        }
        _ => {
            let (balanced_manifest_path, balanced) = cmd_augment(manifest_path, out_dir, cfg)?;
            cmd_featurize(&balanced, &balanced_manifest_path)?
        }
    };
    if train_rows.is_empty() {
        return Err(Error::Invalid("no train rows to fit on".into()));
    }
    if test_rows.is_empty() {
        return Err(Error::Invalid("no test rows to evaluate on".into()));
    }

    feature_file::write_csv(&out_dir.join("features_train.csv"), &train_rows)?;
    feature_file::write_csv(&out_dir.join("features_test.csv"), &test_rows)?;

    let mut results = Vec::new();
    let mut record_rows = Vec::new();
    for &epochs in &cfg.epochs_sweep {
        let (row, model) = cmd_train_eval(&train_rows, &test_rows, cfg, epochs)?;
        model.save(&out_dir.join(format!("model_{epochs}.json")))?;
        record_rows.push(record_row(&row, &model.epoch_log));
        results.push(row);
    }

    write_results(&out_dir.join("results.csv"), &results)?;

    let record = RunRecord {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cfg.seed,
        augment_enabled: cfg.augment_enabled,
        config: cfg.clone(),
        train_counts: count_labels(&train_rows),
        test_counts: count_labels(&test_rows),
        feature_dim: train_rows.first().map(|r| r.values.len()).unwrap_or(0),
        epochs_sweep: cfg.epochs_sweep.clone(),
        results: record_rows,
    };
    let record_json = serde_json::to_string_pretty(&record)
        .map_err(|e| Error::Internal(format!("run record serialization: {e}")))?;
    let record_path = out_dir.join("run_record.json");
    fs::write(&record_path, record_json).map_err(|e| Error::io(&record_path, e))?;

    report::cmd_report(&results, &out_dir.join("report"))?;
    Ok(())
}
