//! Two-class linear softmax head trained with Adam.
//!
//! The head computes `logits = W x + b` for the classes covid and normal.
//! Training minimizes mean cross-entropy per batch with the analytic
//! gradient `(p - y) x`, runs Adam with bias correction, reshuffles every
//! epoch from the seeded stream, and decays the learning rate once the
//! epoch mean loss has failed to improve for a fixed number of epochs.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;

use crate::image::Label;
use crate::rng;

const CLASSES: usize = 2;
/// Probabilities are clamped to at least this before the log.
const PROB_FLOOR: f64 = 1e-12;

/// One labeled sample: an id for bookkeeping, the class, and the feature
/// values.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector {
    pub id: String,
    pub label: Label,
    pub values: Vec<f64>,
}

/// Linear classifier over feature vectors of a fixed dimension.
///
/// Parameters are stored flat: the covid weight row, the normal weight row,
/// then the two biases.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearHead {
    dim: usize,
    params: Vec<f64>,
}

impl LinearHead {
    /// Assembles a head from explicit weight rows and biases, checking
    /// shape and finiteness.
    pub fn from_parts(
        weights: [Vec<f64>; CLASSES],
        biases: [f64; CLASSES],
    ) -> Result<Self, TrainError> {
        let dim = weights[0].len();
        if dim == 0 {
            return Err(TrainError::ZeroDimension);
        }
        if weights[1].len() != dim {
            return Err(TrainError::DimensionMismatch {
                expected: dim,
                actual: weights[1].len(),
            });
        }
        let mut params = Vec::with_capacity(CLASSES * dim + CLASSES);
        params.extend_from_slice(&weights[0]);
        params.extend_from_slice(&weights[1]);
        params.extend_from_slice(&biases);
        if params.iter().any(|p| !p.is_finite()) {
            return Err(TrainError::NonFiniteParameter);
        }
        Ok(Self { dim, params })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Weight row for a class.
    pub fn weights(&self, class: usize) -> &[f64] {
        &self.params[class * self.dim..(class + 1) * self.dim]
    }

    pub fn biases(&self) -> [f64; CLASSES] {
        [
            self.params[CLASSES * self.dim],
            self.params[CLASSES * self.dim + 1],
        ]
    }

    /// Raw class scores for one feature vector.
    pub fn logits(&self, values: &[f64]) -> Result<[f64; CLASSES], TrainError> {
        if values.len() != self.dim {
            return Err(TrainError::DimensionMismatch {
                expected: self.dim,
                actual: values.len(),
            });
        }
        let mut out = [0.0; CLASSES];
        for (c, slot) in out.iter_mut().enumerate() {
            let row = self.weights(c);
            let mut acc = 0.0;
            for (w, x) in row.iter().zip(values) {
                acc += w * x;
            }
            *slot = acc + self.params[CLASSES * self.dim + c];
        }
        Ok(out)
    }

    fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }
}

/// Numerically stable softmax: the max logit is subtracted before
/// exponentiation. Rejects non-finite logits.
pub fn softmax(logits: [f64; CLASSES]) -> Result<[f64; CLASSES], TrainError> {
    if logits.iter().any(|l| !l.is_finite()) {
        return Err(TrainError::NonFiniteLogit);
    }
    let max = if logits[0] >= logits[1] {
        logits[0]
    } else {
        logits[1]
    };
    let e0 = libm::exp(logits[0] - max);
    let e1 = libm::exp(logits[1] - max);
    let sum = e0 + e1;
    Ok([e0 / sum, e1 / sum])
}

/// Cross-entropy of the true class probability, clamped away from zero so
/// the loss stays finite.
pub fn cross_entropy(probs: [f64; CLASSES], label: Label) -> f64 {
    let p = probs[label.class_index()].max(PROB_FLOOR);
    -libm::log(p)
}

/// First- and second-moment accumulators for Adam.
#[derive(Clone, Debug)]
pub struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    /// Fresh state with the standard coefficients (0.9, 0.999, 1e-8).
    pub fn new(param_count: usize) -> Self {
        Self {
            m: vec![0.0; param_count],
            v: vec![0.0; param_count],
            t: 0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }

    /// Number of completed steps.
    pub fn step_count(&self) -> u64 {
        self.t
    }
}

/// One Adam update over a flat parameter slice:
/// `m = b1 m + (1-b1) g`, `v = b2 v + (1-b2) g^2`, both bias-corrected by
/// `1 - b^t`, then `p -= lr * m_hat / (sqrt(v_hat) + eps)`.
pub fn adam_step(
    params: &mut [f64],
    grads: &[f64],
    state: &mut AdamState,
    lr: f64,
) -> Result<(), TrainError> {
    if params.len() != grads.len() || params.len() != state.m.len() {
        return Err(TrainError::ParameterShapeMismatch {
            params: params.len(),
            grads: grads.len(),
            state: state.m.len(),
        });
    }
    if grads.iter().any(|g| !g.is_finite()) {
        return Err(TrainError::NonFiniteGradient);
    }
    state.t += 1;
    let bias1 = 1.0 - libm::pow(state.beta1, state.t as f64);
    let bias2 = 1.0 - libm::pow(state.beta2, state.t as f64);
    for i in 0..params.len() {
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grads[i];
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grads[i] * grads[i];
        let m_hat = state.m[i] / bias1;
        let v_hat = state.v[i] / bias2;
        params[i] -= lr * m_hat / (libm::sqrt(v_hat) + state.epsilon);
    }
    Ok(())
}

/// Optimizer and schedule settings.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub lr0: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub decay_factor: f64,
    pub patience_epochs: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lr0: 0.01,
            batch_size: 16,
            epochs: 25,
            decay_factor: 0.01,
            patience_epochs: 4,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if !(self.lr0 > 0.0) || !self.lr0.is_finite() {
            return Err(TrainError::InvalidLearningRate { value: self.lr0 });
        }
        if self.batch_size == 0 {
            return Err(TrainError::InvalidBatchSize);
        }
        if self.epochs == 0 {
            return Err(TrainError::InvalidEpochs);
        }
        if !(self.decay_factor > 0.0 && self.decay_factor < 1.0) {
            return Err(TrainError::InvalidDecayFactor {
                value: self.decay_factor,
            });
        }
        if self.patience_epochs == 0 {
            return Err(TrainError::InvalidPatience);
        }
        Ok(())
    }
}

/// Loss and learning rate recorded after each epoch.
#[derive(Clone, Debug, PartialEq)]
pub struct EpochStats {
    pub mean_loss: f64,
    pub learning_rate: f64,
}

/// Mean cross-entropy of the head over a batch.
pub fn batch_loss(head: &LinearHead, samples: &[&FeatureVector]) -> Result<f64, TrainError> {
    if samples.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    let mut total = 0.0;
    for sample in samples {
        let probs = softmax(head.logits(&sample.values)?)?;
        total += cross_entropy(probs, sample.label);
    }
    Ok(total / samples.len() as f64)
}

/// Analytic gradient of [`batch_loss`] in the head's flat parameter layout,
/// together with the loss itself.
pub fn batch_gradient(
    head: &LinearHead,
    samples: &[&FeatureVector],
) -> Result<(Vec<f64>, f64), TrainError> {
    if samples.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    let d = head.dim();
    let mut grads = vec![0.0; CLASSES * d + CLASSES];
    let mut total_loss = 0.0;
    for sample in samples {
        let probs = softmax(head.logits(&sample.values)?)?;
        total_loss += cross_entropy(probs, sample.label);
        let truth = sample.label.class_index();
        for c in 0..CLASSES {
            let delta = probs[c] - if c == truth { 1.0 } else { 0.0 };
            for (j, &x) in sample.values.iter().enumerate() {
                grads[c * d + j] += delta * x;
            }
            grads[CLASSES * d + c] += delta;
        }
    }
    let scale = 1.0 / samples.len() as f64;
    for g in grads.iter_mut() {
        *g *= scale;
    }
    Ok((grads, total_loss * scale))
}

/// Trains a head from uniformly initialized weights.
///
/// Weights start in `[-1/sqrt(D), 1/sqrt(D))` drawn from the seeded stream,
/// biases at zero. Every epoch shuffles the sample order, walks it in
/// batches of `batch_size` (the trailing batch may be smaller), and applies
/// one Adam step per batch. If the epoch mean loss has not beaten the best
/// seen for `patience_epochs` consecutive epochs, the learning rate is
/// multiplied by `decay_factor` and the stall counter restarts.
pub fn train(
    features: &[FeatureVector],
    cfg: &TrainConfig,
) -> Result<(LinearHead, Vec<EpochStats>), TrainError> {
    cfg.validate()?;
    if features.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    let d = features[0].values.len();
    if d == 0 {
        return Err(TrainError::ZeroDimension);
    }
    for (index, f) in features.iter().enumerate() {
        if f.values.len() != d {
            return Err(TrainError::DimensionMismatch {
                expected: d,
                actual: f.values.len(),
            });
        }
        if f.values.iter().any(|v| !v.is_finite()) {
            return Err(TrainError::NonFiniteFeature { index });
        }
    }

    let mut stream = rng::stream(cfg.seed);
    let bound = 1.0 / libm::sqrt(d as f64);
    let mut params = vec![0.0; CLASSES * d + CLASSES];
    for p in params[..CLASSES * d].iter_mut() {
        *p = rng::symmetric(&mut stream, bound);
    }
    let mut head = LinearHead { dim: d, params };

    let mut state = AdamState::new(CLASSES * d + CLASSES);
    let mut lr = cfg.lr0;
    let mut best_loss = f64::INFINITY;
    let mut stalled = 0usize;
    let mut log = Vec::with_capacity(cfg.epochs);
    let mut order: Vec<usize> = (0..features.len()).collect();
    let mut batch: Vec<&FeatureVector> = Vec::with_capacity(cfg.batch_size);

    for _ in 0..cfg.epochs {
        order.shuffle(&mut stream);
        let mut loss_sum = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| &features[i]));
            let (grads, mean_batch_loss) = batch_gradient(&head, &batch)?;
            loss_sum += mean_batch_loss * batch.len() as f64;
            adam_step(head.params_mut(), &grads, &mut state, lr)?;
        }
        let mean_loss = loss_sum / features.len() as f64;
        log.push(EpochStats {
            mean_loss,
            learning_rate: lr,
        });
        if mean_loss < best_loss {
            best_loss = mean_loss;
            stalled = 0;
        } else {
            stalled += 1;
            if stalled >= cfg.patience_epochs {
                lr *= cfg.decay_factor;
                stalled = 0;
            }
        }
    }
    Ok((head, log))
}

/// Predicted label and its probability. Ties go to normal, so an
/// uninformative head never raises a positive finding.
pub fn predict(head: &LinearHead, feature: &FeatureVector) -> Result<(Label, f64), TrainError> {
    let probs = softmax(head.logits(&feature.values)?)?;
    let covid = Label::Covid.class_index();
    let normal = Label::Normal.class_index();
    if probs[covid] > probs[normal] {
        Ok((Label::Covid, probs[covid]))
    } else {
        Ok((Label::Normal, probs[normal]))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TrainError {
    EmptyDataset,
    ZeroDimension,
    DimensionMismatch { expected: usize, actual: usize },
    NonFiniteFeature { index: usize },
    NonFiniteParameter,
    NonFiniteLogit,
    NonFiniteGradient,
    ParameterShapeMismatch { params: usize, grads: usize, state: usize },
    InvalidLearningRate { value: f64 },
    InvalidBatchSize,
    InvalidEpochs,
    InvalidDecayFactor { value: f64 },
    InvalidPatience,
}

impl fmt::Display for TrainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrainError::EmptyDataset => write!(f, "no feature vectors to train on"),
            TrainError::ZeroDimension => write!(f, "feature vectors must have at least one value"),
            TrainError::DimensionMismatch { expected, actual } => {
                write!(f, "expected {expected} feature values, got {actual}")
            }
            TrainError::NonFiniteFeature { index } => {
                write!(f, "feature vector {index} contains a non-finite value")
            }
            TrainError::NonFiniteParameter => write!(f, "head parameter is not finite"),
            TrainError::NonFiniteLogit => write!(f, "logit is not finite"),
            TrainError::NonFiniteGradient => write!(f, "gradient is not finite"),
            TrainError::ParameterShapeMismatch { params, grads, state } => write!(
                f,
                "parameter slice ({params}), gradient slice ({grads}), and optimizer state ({state}) disagree"
            ),
            TrainError::InvalidLearningRate { value } => {
                write!(f, "learning rate must be positive and finite, got {value}")
            }
            TrainError::InvalidBatchSize => write!(f, "batch size must be at least 1"),
            TrainError::InvalidEpochs => write!(f, "epoch count must be at least 1"),
            TrainError::InvalidDecayFactor { value } => {
                write!(f, "decay factor must be in (0, 1), got {value}")
            }
            TrainError::InvalidPatience => write!(f, "patience must be at least 1 epoch"),
        }
    }
}

impl core::error::Error for TrainError {}
