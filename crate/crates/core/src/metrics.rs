//! Confusion-matrix metrics for the two-class task. Covid is the positive
//! class throughout.

use core::fmt;

use crate::image::Label;

/// Prediction-versus-truth counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub true_positives: u64,
    pub false_negatives: u64,
    pub false_positives: u64,
    pub true_negatives: u64,
}

/// Matthews correlation plus a flag marking the zero-denominator case,
/// where the value is reported as 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MccScore {
    pub value: f64,
    pub degenerate: bool,
}

impl ConfusionMatrix {
    pub fn new(
        true_positives: u64,
        false_negatives: u64,
        false_positives: u64,
        true_negatives: u64,
    ) -> Self {
        Self {
            true_positives,
            false_negatives,
            false_positives,
            true_negatives,
        }
    }

    /// Tallies aligned prediction/truth pairs.
    pub fn from_predictions(
        predictions: &[Label],
        truths: &[Label],
    ) -> Result<Self, MetricError> {
        if predictions.len() != truths.len() {
            return Err(MetricError::LengthMismatch {
                predictions: predictions.len(),
                truths: truths.len(),
            });
        }
        if predictions.is_empty() {
            return Err(MetricError::EmptyInput);
        }
        let mut cm = Self::new(0, 0, 0, 0);
        for (&p, &t) in predictions.iter().zip(truths) {
            match (t, p) {
                (Label::Covid, Label::Covid) => cm.true_positives += 1,
                (Label::Covid, Label::Normal) => cm.false_negatives += 1,
                (Label::Normal, Label::Covid) => cm.false_positives += 1,
                (Label::Normal, Label::Normal) => cm.true_negatives += 1,
            }
        }
        Ok(cm)
    }

    pub fn total(&self) -> u64 {
        self.true_positives + self.false_negatives + self.false_positives + self.true_negatives
    }

    pub fn actual_positives(&self) -> u64 {
        self.true_positives + self.false_negatives
    }

    pub fn actual_negatives(&self) -> u64 {
        self.false_positives + self.true_negatives
    }

    /// TP / (TP + FN). Undefined without actual positives.
    pub fn sensitivity(&self) -> Result<f64, MetricError> {
        let denom = self.actual_positives();
        if denom == 0 {
            return Err(MetricError::NoActualPositives);
        }
        Ok(self.true_positives as f64 / denom as f64)
    }

    /// TN / (FP + TN). Undefined without actual negatives.
    pub fn specificity(&self) -> Result<f64, MetricError> {
        let denom = self.actual_negatives();
        if denom == 0 {
            return Err(MetricError::NoActualNegatives);
        }
        Ok(self.true_negatives as f64 / denom as f64)
    }

    /// (TP + TN) / total.
    pub fn accuracy(&self) -> Result<f64, MetricError> {
        let denom = self.total();
        if denom == 0 {
            return Err(MetricError::EmptyMatrix);
        }
        Ok((self.true_positives + self.true_negatives) as f64 / denom as f64)
    }

    /// Matthews correlation coefficient. Counts are promoted to f64 before
    /// multiplication, so totals in the tens of thousands cannot overflow.
    pub fn mcc(&self) -> MccScore {
        let tp = self.true_positives as f64;
        let fn_ = self.false_negatives as f64;
        let fp = self.false_positives as f64;
        let tn = self.true_negatives as f64;
        let f1 = tp + fp;
        let f2 = tp + fn_;
        let f3 = tn + fp;
        let f4 = tn + fn_;
        if f1 == 0.0 || f2 == 0.0 || f3 == 0.0 || f4 == 0.0 {
            return MccScore {
                value: 0.0,
                degenerate: true,
            };
        }
        MccScore {
            value: (tp * tn - fp * fn_) / libm::sqrt(f1 * f2 * f3 * f4),
            degenerate: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MetricError {
    LengthMismatch { predictions: usize, truths: usize },
    EmptyInput,
    EmptyMatrix,
    NoActualPositives,
    NoActualNegatives,
}

impl fmt::Display for MetricError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricError::LengthMismatch {
                predictions,
                truths,
            } => write!(f, "{predictions} predictions against {truths} truths"),
            MetricError::EmptyInput => write!(f, "no prediction/truth pairs"),
            MetricError::EmptyMatrix => write!(f, "confusion matrix is empty"),
            MetricError::NoActualPositives => {
                write!(f, "sensitivity is undefined without actual positives")
            }
            MetricError::NoActualNegatives => {
                write!(f, "specificity is undefined without actual negatives")
            }
        }
    }
}

impl core::error::Error for MetricError {}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn counts_land_in_the_right_cells() {
        use Label::{Covid, Normal};
        let predictions = vec![Covid, Normal, Covid, Normal, Normal];
        let truths = vec![Covid, Covid, Normal, Normal, Normal];
        let cm = ConfusionMatrix::from_predictions(&predictions, &truths).unwrap();
        assert_eq!(cm, ConfusionMatrix::new(1, 1, 1, 2));
        assert_eq!(cm.total(), 5);
    }

    #[test]
    fn mismatched_or_empty_inputs_are_rejected() {
        assert_eq!(
            ConfusionMatrix::from_predictions(&[Label::Covid], &[]),
            Err(MetricError::LengthMismatch {
                predictions: 1,
                truths: 0
            })
        );
        assert_eq!(
            ConfusionMatrix::from_predictions(&[], &[]),
            Err(MetricError::EmptyInput)
        );
    }

    #[test]
    fn rates_match_hand_computation() {
        let cm = ConfusionMatrix::new(28, 12, 11, 2989);
        assert!((cm.sensitivity().unwrap() - 0.7).abs() < 1e-12);
        assert!((cm.specificity().unwrap() - 2989.0 / 3000.0).abs() < 1e-12);
        assert!((cm.accuracy().unwrap() - 3017.0 / 3040.0).abs() < 1e-12);
        let expected_mcc = (28.0 * 2989.0 - 11.0 * 12.0)
            / libm::sqrt(39.0 * 40.0 * 3000.0 * 3001.0);
        let mcc = cm.mcc();
        assert!(!mcc.degenerate);
        assert!((mcc.value - expected_mcc).abs() < 1e-12);
        assert!((mcc.value - 0.705).abs() < 0.001);
    }

    #[test]
    fn perfect_and_inverted_predictors_hit_the_extremes() {
        let perfect = ConfusionMatrix::new(10, 0, 0, 20);
        assert_eq!(perfect.sensitivity().unwrap(), 1.0);
        assert_eq!(perfect.specificity().unwrap(), 1.0);
        assert_eq!(perfect.accuracy().unwrap(), 1.0);
        assert!((perfect.mcc().value - 1.0).abs() < 1e-12);

        let inverted = ConfusionMatrix::new(0, 10, 20, 0);
        assert!((inverted.mcc().value + 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_mcc_is_flagged_zero() {
        // no predicted positives: TP + FP = 0
        let cm = ConfusionMatrix::new(0, 5, 0, 10);
        let mcc = cm.mcc();
        assert_eq!(mcc.value, 0.0);
        assert!(mcc.degenerate);
    }

    #[test]
    fn undefined_rates_are_errors() {
        let no_pos = ConfusionMatrix::new(0, 0, 3, 7);
        assert_eq!(no_pos.sensitivity(), Err(MetricError::NoActualPositives));
        let no_neg = ConfusionMatrix::new(3, 7, 0, 0);
        assert_eq!(no_neg.specificity(), Err(MetricError::NoActualNegatives));
        let empty = ConfusionMatrix::new(0, 0, 0, 0);
        assert_eq!(empty.accuracy(), Err(MetricError::EmptyMatrix));
    }

    #[test]
    fn swapping_the_positive_class_swaps_the_rates() {
        let cm = ConfusionMatrix::new(28, 12, 11, 2989);
        let swapped = ConfusionMatrix::new(
            cm.true_negatives,
            cm.false_positives,
            cm.false_negatives,
            cm.true_positives,
        );
        assert_eq!(swapped.sensitivity(), cm.specificity());
        assert_eq!(swapped.specificity(), cm.sensitivity());
        assert_eq!(swapped.accuracy(), cm.accuracy());
        assert_eq!(swapped.mcc().value, cm.mcc().value);
    }

    #[test]
    fn large_counts_do_not_overflow() {
        // u64 products of these would wrap; the f64 path must not
        let cm = ConfusionMatrix::new(3_000_000_000, 1, 1, 3_000_000_000);
        let mcc = cm.mcc();
        assert!(mcc.value.is_finite());
        assert!(mcc.value > 0.99);
    }
}
