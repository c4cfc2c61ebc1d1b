//! End-to-end trainer checks on a small separable dataset.

use radaug_core::image::Label;
use radaug_core::metrics::ConfusionMatrix;
use radaug_core::trainer::{predict, train, FeatureVector, TrainConfig};
use radaug_testkit::separable_features;

/// Exhaustive search over a coarse weight grid. Returns true if some linear
/// rule classifies every sample correctly, proving the set is separable
/// without involving the trainer.
fn grid_separator_exists(features: &[FeatureVector]) -> bool {
    let d = features[0].values.len();
    let levels = [-1.0, 0.0, 1.0];
    let mut weights = vec![0usize; d];
    loop {
        for &bias in &levels {
            let classifies_all = features.iter().all(|f| {
                let score: f64 = f
                    .values
                    .iter()
                    .enumerate()
                    .map(|(j, &x)| levels[weights[j]] * x)
                    .sum::<f64>()
                    + bias;
                match f.label {
                    Label::Covid => score > 0.0,
                    Label::Normal => score <= 0.0,
                }
            });
            if classifies_all {
                return true;
            }
        }
        // odometer increment over the weight grid
        let mut pos = 0;
        loop {
            if pos == d {
                return false;
            }
            weights[pos] += 1;
            if weights[pos] < levels.len() {
                break;
            }
            weights[pos] = 0;
            pos += 1;
        }
    }
}

fn train_accuracy(features: &[FeatureVector], seed: u64) -> f64 {
    let cfg = TrainConfig {
        epochs: 25,
        seed,
        ..TrainConfig::default()
    };
    let (head, log) = train(features, &cfg).unwrap();
    assert_eq!(log.len(), 25);
    let predictions: Vec<Label> = features
        .iter()
        .map(|f| predict(&head, f).unwrap().0)
        .collect();
    let truths: Vec<Label> = features.iter().map(|f| f.label).collect();
    let cm = ConfusionMatrix::from_predictions(&predictions, &truths).unwrap();
    cm.accuracy().unwrap()
}

#[test]
fn the_fixture_is_separable_by_grid_search() {
    let features = separable_features(2024);
    assert_eq!(features.len(), 20);
    assert!(grid_separator_exists(&features));
}

#[test]
fn training_reaches_full_accuracy_on_each_suite_seed() {
    let features = separable_features(2024);
    for seed in 1..=10u64 {
        let acc = train_accuracy(&features, seed);
        assert_eq!(acc, 1.0, "seed {seed} ended below 100% train accuracy");
    }
}

#[test]
fn loss_trends_downward_on_separable_data() {
    let features = separable_features(7);
    let cfg = TrainConfig {
        epochs: 25,
        seed: 1,
        ..TrainConfig::default()
    };
    let (_, log) = train(&features, &cfg).unwrap();
    assert!(
        log.last().unwrap().mean_loss < log.first().unwrap().mean_loss,
        "loss failed to improve: first {} last {}",
        log.first().unwrap().mean_loss,
        log.last().unwrap().mean_loss
    );
}
