//! Dataset construction and the mini-batch training loop.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adam::{adam_step, AdamState};
use super::net::Mlp;
use super::NeuralError;
use crate::market_data::{normalize_window, window, PriceSeries};
use crate::trend::{label_trends, smooth, TrendLabel};

/// Hyperparameters of one training run. Two presets exist: `paper`
/// (full-scale, hours on one machine) and `desk` (minutes, used as the
/// test default).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub dropout_p: f64,
    pub l2_factor: f64,
    pub batch_size: usize,
    pub seed: u64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
}

impl TrainingConfig {
    /// Desk-scale profile: small enough to train in minutes.
    pub fn desk() -> Self {
        Self {
            learning_rate: 1e-3,
            epochs: 2000,
            dropout_p: 0.2,
            l2_factor: 1e-4,
            batch_size: 32,
            seed: 42,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
        }
    }

    /// Full-scale profile matching the published hyperparameters.
    pub fn paper() -> Self {
        Self {
            learning_rate: 1e-6,
            epochs: 30_000,
            ..Self::desk()
        }
    }

    pub fn validate(&self) -> Result<(), NeuralError> {
        if !(0.0..1.0).contains(&self.dropout_p) {
            return Err(NeuralError::InvalidConfig(format!(
                "dropout probability must lie in [0, 1); got {}",
                self.dropout_p
            )));
        }
        if !(0.0 < self.adam_beta1 && self.adam_beta1 < 1.0)
            || !(0.0 < self.adam_beta2 && self.adam_beta2 < 1.0)
        {
            return Err(NeuralError::InvalidConfig(format!(
                "adam betas must lie in (0, 1); got {} and {}",
                self.adam_beta1, self.adam_beta2
            )));
        }
        if self.learning_rate <= 0.0 {
            return Err(NeuralError::InvalidConfig(format!(
                "learning rate must be positive; got {}",
                self.learning_rate
            )));
        }
        if self.batch_size == 0 {
            return Err(NeuralError::InvalidConfig("batch size must be positive".into()));
        }
        if self.l2_factor < 0.0 {
            return Err(NeuralError::InvalidConfig(format!(
                "l2 factor must be non-negative; got {}",
                self.l2_factor
            )));
        }
        Ok(())
    }
}

/// Supervised examples: normalized price windows paired with the trend
/// label at the window's origin step.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub inputs: Vec<Vec<f64>>,
    pub labels: Vec<TrendLabel>,
    /// Time step each example was taken at, in chronological order.
    pub origins: Vec<usize>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn has_both_classes(&self) -> bool {
        self.labels.iter().any(|l| *l == TrendLabel::Up)
            && self.labels.iter().any(|l| *l == TrendLabel::Down)
    }

    /// Chronological split: the earliest `train_fraction` of examples
    /// form the training set, the remainder the validation set.
    pub fn split_chronological(&self, train_fraction: f64) -> (Dataset, Dataset) {
        let cut = ((self.len() as f64) * train_fraction).floor() as usize;
        let cut = cut.min(self.len());
        let take = |range: std::ops::Range<usize>| Dataset {
            inputs: self.inputs[range.clone()].to_vec(),
            labels: self.labels[range.clone()].to_vec(),
            origins: self.origins[range].to_vec(),
        };
        (take(0..cut), take(cut..self.len()))
    }
}

/// Builds one example per time step where both the `window_len`-price
/// history and the trend label exist: `t ∈ [max(K, k+1), T-1-k]`.
/// Inputs are per-window standardized.
pub fn build_dataset(
    series: &PriceSeries,
    window_len: usize,
    filter_order: usize,
) -> Result<Dataset, NeuralError> {
    let t_len = series.len();
    let first = window_len.max(filter_order + 1);
    let last = t_len.saturating_sub(filter_order + 1);
    if last < first {
        return Err(NeuralError::InsufficientData {
            len: t_len,
            window_len,
            filter_order,
        });
    }
    let sm = smooth(series, filter_order).map_err(|_| NeuralError::InsufficientData {
        len: t_len,
        window_len,
        filter_order,
    })?;
    let labels: std::collections::BTreeMap<usize, TrendLabel> =
        label_trends(&sm).into_iter().collect();

    let mut dataset = Dataset {
        inputs: Vec::with_capacity(last - first + 1),
        labels: Vec::with_capacity(last - first + 1),
        origins: Vec::with_capacity(last - first + 1),
    };
    for t in first..=last {
        let label = labels
            .get(&t)
            .copied()
            .expect("label exists for every t in [k+1, T-1-k]");
        let w = window(series, t, window_len).expect("t >= window_len by construction");
        dataset.inputs.push(normalize_window(&w).values);
        dataset.labels.push(label);
        dataset.origins.push(t);
    }
    Ok(dataset)
}

/// Result of a training run: the trained network and the per-epoch mean
/// training loss.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub mlp: Mlp,
    pub loss_curve: Vec<f64>,
}

/// Runs `epochs` passes of shuffled mini-batch updates. Fully
/// deterministic given `config.seed`: the shuffle order, dropout masks
/// and therefore the trained parameters are reproducible.
pub fn train(mlp: Mlp, data: &Dataset, config: &TrainingConfig) -> Result<TrainOutcome, NeuralError> {
    config.validate()?;
    if data.is_empty() || !data.has_both_classes() {
        return Err(NeuralError::DegenerateDataset);
    }
    let mut mlp = mlp;
    let mut state = AdamState::new(&mlp);
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut mask_rng = ChaCha8Rng::seed_from_u64(config.seed);
    mask_rng.set_stream(1);

    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut loss_curve = Vec::with_capacity(config.epochs);
    for _ in 0..config.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut weighted_loss = 0.0;
        for chunk in order.chunks(config.batch_size) {
            let dropout = if config.dropout_p > 0.0 {
                Some((config.dropout_p, &mut mask_rng))
            } else {
                None
            };
            let (batch_loss, grads) =
                mlp.gradients(&data.inputs, &data.labels, chunk, config.l2_factor, dropout)?;
            adam_step(&mut state, &mut mlp, &grads, config);
            weighted_loss += batch_loss * chunk.len() as f64;
        }
        loss_curve.push(weighted_loss / data.len() as f64);
    }
    Ok(TrainOutcome { mlp, loss_curve })
}

/// Fraction of examples the network classifies correctly (eval mode).
pub fn dataset_accuracy(mlp: &Mlp, data: &Dataset) -> Result<f64, NeuralError> {
    if data.is_empty() {
        return Err(NeuralError::EmptyBatch);
    }
    let mut correct = 0usize;
    for (input, label) in data.inputs.iter().zip(&data.labels) {
        let probs = mlp.probabilities(input)?;
        let predicted = if probs[0] >= probs[1] {
            TrendLabel::Up
        } else {
            TrendLabel::Down
        };
        if predicted == *label {
            correct += 1;
        }
    }
    Ok(correct as f64 / data.len() as f64)
}

/// Writes the per-epoch loss curve as `epoch,mean_loss` CSV.
pub fn write_loss_curve_csv(
    path: &std::path::Path,
    curve: &[f64],
    comments: &[String],
) -> std::io::Result<()> {
    let mut out = String::new();
    for c in comments {
        out.push_str(&format!("# {c}\n"));
    }
    out.push_str("epoch,mean_loss\n");
    for (epoch, loss) in curve.iter().enumerate() {
        out.push_str(&format!("{epoch},{loss}\n"));
    }
    std::fs::write(path, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;
    use rand::Rng;

    fn ramp_series(len: usize) -> PriceSeries {
        let prices: Vec<f64> = (0..len).map(|i| 40.0 + 0.05 * i as f64).collect();
        PriceSeries::from_prices(2015, NaiveDate::from_ymd_opt(2015, 1, 2).unwrap(), &prices)
    }

    #[test]
    fn dataset_covers_expected_index_range() {
        let data = build_dataset(&ramp_series(750), 50, 25).unwrap();
        assert_eq!(data.len(), 675);
        assert_eq!(*data.origins.first().unwrap(), 50);
        assert_eq!(*data.origins.last().unwrap(), 724);

        let small = build_dataset(&ramp_series(100), 50, 25).unwrap();
        assert_eq!(small.len(), 25);
        assert_eq!(*small.origins.first().unwrap(), 50);
        assert_eq!(*small.origins.last().unwrap(), 74);
    }

    #[test]
    fn dataset_rejects_short_series() {
        assert!(matches!(
            build_dataset(&ramp_series(60), 50, 25),
            Err(NeuralError::InsufficientData { .. })
        ));
    }

    /// Random vectors labelled by the sign of their mean are linearly
    /// separable, so a small net should fit them almost perfectly.
    fn separable_dataset(n: usize, dim: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut inputs = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        while inputs.len() < n {
            let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mean = v.iter().sum::<f64>() / dim as f64;
            if mean.abs() < 0.05 {
                continue; // keep a margin so separability is comfortable
            }
            labels.push(if mean >= 0.0 {
                TrendLabel::Up
            } else {
                TrendLabel::Down
            });
            inputs.push(v);
        }
        let origins = (0..n).collect();
        Dataset {
            inputs,
            labels,
            origins,
        }
    }

    #[test]
    fn training_fits_separable_data() {
        let data = separable_dataset(256, 8, 3);
        let mlp = Mlp::init(&[8, 16, 2], 0).unwrap();
        let config = TrainingConfig {
            epochs: 150,
            dropout_p: 0.0,
            l2_factor: 0.0,
            ..TrainingConfig::desk()
        };
        let outcome = train(mlp, &data, &config).unwrap();
        let acc = dataset_accuracy(&outcome.mlp, &data).unwrap();
        assert!(acc >= 0.99, "training accuracy {acc}");
        assert!(outcome.loss_curve.last().unwrap() < outcome.loss_curve.first().unwrap());
    }

    #[test]
    fn zero_epochs_is_identity() {
        let data = separable_dataset(32, 6, 9);
        let mlp = Mlp::init(&[6, 8, 2], 4).unwrap();
        let config = TrainingConfig {
            epochs: 0,
            ..TrainingConfig::desk()
        };
        let outcome = train(mlp.clone(), &data, &config).unwrap();
        assert_eq!(outcome.mlp, mlp);
        assert!(outcome.loss_curve.is_empty());
    }

    #[test]
    fn training_is_deterministic_in_seed() {
        let data = separable_dataset(64, 6, 1);
        let config = TrainingConfig {
            epochs: 20,
            ..TrainingConfig::desk()
        };
        let run = || {
            let mlp = Mlp::init(&[6, 12, 2], 11).unwrap();
            train(mlp, &data, &config).unwrap()
        };
        let (a, b) = (run(), run());
        assert_eq!(a.loss_curve, b.loss_curve);
        assert_eq!(a.mlp, b.mlp);
    }

    #[test]
    fn single_class_dataset_is_rejected() {
        let mut data = separable_dataset(16, 4, 2);
        data.labels.iter_mut().for_each(|l| *l = TrendLabel::Up);
        let mlp = Mlp::init(&[4, 8, 2], 0).unwrap();
        assert!(matches!(
            train(mlp, &data, &TrainingConfig::desk()),
            Err(NeuralError::DegenerateDataset)
        ));
    }

    #[test]
    fn larger_l2_shrinks_weights_on_noise_labels() {
        // Pure-noise labels: any fit is memorization, so the weight norm
        // should fall monotonically as the penalty grows.
        let mut data = separable_dataset(128, 6, 7);
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        for l in &mut data.labels {
            *l = if rng.random::<bool>() {
                TrendLabel::Up
            } else {
                TrendLabel::Down
            };
        }
        if !data.has_both_classes() {
            data.labels[0] = TrendLabel::Up;
            data.labels[1] = TrendLabel::Down;
        }
        let mut norms = Vec::new();
        for l2 in [0.0, 1e-3, 1e-1] {
            let config = TrainingConfig {
                epochs: 120,
                dropout_p: 0.0,
                l2_factor: l2,
                ..TrainingConfig::desk()
            };
            let mlp = Mlp::init(&[6, 12, 2], 31).unwrap();
            let outcome = train(mlp, &data, &config).unwrap();
            norms.push(outcome.mlp.weight_norm_sq());
        }
        assert!(
            norms[0] > norms[1] && norms[1] > norms[2],
            "weight norms not decreasing: {norms:?}"
        );
    }

    #[test]
    fn chronological_split_keeps_order() {
        let data = separable_dataset(100, 4, 5);
        let (train_set, val_set) = data.split_chronological(0.8);
        assert_eq!(train_set.len(), 80);
        assert_eq!(val_set.len(), 20);
        assert_eq!(train_set.origins.last().unwrap() + 1, val_set.origins[0]);
    }
}
