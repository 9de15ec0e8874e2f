use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::mlp::{Layer, MlpModel, Normalizer};
use super::{SalienceError, SalienceLabels};
use crate::features::FeatureMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub hidden_sizes: [usize; 3],
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { learning_rate: 0.004, batch_size: 64, epochs: 50, seed: 42, hidden_sizes: [128, 64, 32] }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<(), SalienceError> {
        let ok = self.learning_rate.is_finite()
            && self.learning_rate > 0.0
            && self.batch_size > 0
            && self.epochs > 0
            && self.hidden_sizes.iter().all(|&h| h > 0);
        if ok {
            Ok(())
        } else {
            Err(SalienceError::InvalidConfig(format!("{self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainReport {
    /// Mean squared error over each epoch's minibatches, measured before
    /// each batch's update.
    pub epoch_losses: Vec<f64>,
}

/// Plain minibatch SGD on mean squared error.
///
/// Inputs are z-scored with statistics fit on all training rows. Weights
/// start Glorot-uniform and biases at zero, and rows are reshuffled each
/// epoch; both draw from a single generator seeded with `cfg.seed`.
pub fn train(
    features: &[FeatureMatrix],
    labels: &[SalienceLabels],
    cfg: &TrainConfig,
) -> Result<(MlpModel, TrainReport), SalienceError> {
    cfg.validate()?;
    if features.len() != labels.len() {
        return Err(SalienceError::LabelCountMismatch(labels.len(), features.len()));
    }
    let Some(first) = features.first() else {
        return Err(SalienceError::EmptyTrainingSet);
    };
    let schema = first.schema.clone();
    let width = schema.width();
    let mut raw_rows: Vec<&[f64]> = Vec::new();
    let mut targets = Vec::new();
    for (m, l) in features.iter().zip(labels) {
        if m.schema != schema || m.rows.iter().any(|r| r.len() != width) {
            return Err(SalienceError::SchemaMismatch);
        }
        if m.rows.len() != l.values.len() {
            return Err(SalienceError::LabelCountMismatch(l.values.len(), m.rows.len()));
        }
        raw_rows.extend(m.rows.iter().map(Vec::as_slice));
        targets.extend_from_slice(&l.values);
    }
    if raw_rows.is_empty() {
        return Err(SalienceError::EmptyTrainingSet);
    }

    let normalizer = Normalizer::fit(&raw_rows, width);
    let rows: Vec<Vec<f64>> = raw_rows.iter().map(|r| normalizer.apply(r)).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let widths = [width, cfg.hidden_sizes[0], cfg.hidden_sizes[1], cfg.hidden_sizes[2], 1];
    let layers = widths
        .windows(2)
        .map(|w| {
            let (fan_in, fan_out) = (w[0], w[1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let weights = (0..fan_in * fan_out).map(|_| rng.random_range(-limit..limit)).collect();
            Layer { rows: fan_out, cols: fan_in, weights, bias: vec![0.0; fan_out] }
        })
        .collect();
    let mut model = MlpModel::new(schema, normalizer, layers)?;

    let mut order: Vec<usize> = (0..rows.len()).collect();
    let mut report = TrainReport::default();
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut squared_error = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let scale = 1.0 / batch.len() as f64;
            let mut grads = model.zero_grads();
            for &i in batch {
                let pred = model.accumulate_gradients(&rows[i], targets[i], scale, &mut grads);
                squared_error += (pred - targets[i]).powi(2);
            }
            for (layer, g) in model.layers_mut().iter_mut().zip(&grads) {
                for (w, d) in layer.weights.iter_mut().zip(&g.weights) {
                    *w -= cfg.learning_rate * d;
                }
                for (b, d) in layer.bias.iter_mut().zip(&g.bias) {
                    *b -= cfg.learning_rate * d;
                }
            }
        }
        let mse = squared_error / rows.len() as f64;
        if !mse.is_finite() {
            return Err(SalienceError::Diverged(epoch + 1));
        }
        report.epoch_losses.push(mse);
    }
    Ok((model, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureSchema;

    fn dataset(n: usize, seed: u64) -> (FeatureMatrix, SalienceLabels) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let schema = FeatureSchema { scalar_names: (0..4).map(|i| format!("x{i}")).collect(), embedding_dim: 0 };
        let mut rows = Vec::new();
        let mut values = Vec::new();
        for _ in 0..n {
            let row: Vec<f64> = vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), 7.0, rng.random_range(0.0..50.0)];
            values.push(0.8 * row[0] + 0.1);
            rows.push(row);
        }
        (FeatureMatrix { schema, rows }, SalienceLabels { values })
    }

    fn small_cfg() -> TrainConfig {
        TrainConfig { hidden_sizes: [8, 6, 4], epochs: 5, ..TrainConfig::default() }
    }

    #[test]
    fn converges_given_enough_steps() {
        // Default learning rate and batch size; 2,000 epochs of 7 batches
        // give the optimizer 14,000 updates.
        let (m, l) = dataset(400, 5);
        let cfg = TrainConfig { hidden_sizes: [8, 6, 4], epochs: 2000, ..TrainConfig::default() };
        let report = train(&[m], &[l], &cfg).unwrap().1;
        let (first, last) = (report.epoch_losses[0], *report.epoch_losses.last().unwrap());
        assert!(last <= 0.10 * first, "first {first}, last {last}");
    }

    #[test]
    fn same_seed_same_model() {
        let (m, l) = dataset(200, 1);
        let a = train(std::slice::from_ref(&m), std::slice::from_ref(&l), &small_cfg()).unwrap().0;
        let b = train(&[m], &[l], &small_cfg()).unwrap().0;
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn constant_column_keeps_weights_finite() {
        let (m, l) = dataset(200, 2);
        let (model, report) = train(&[m], &[l], &small_cfg()).unwrap();
        assert_eq!(model.normalizer().stds[2], 1.0);
        assert!(model.layers().iter().all(|layer| layer.weights.iter().all(|w| w.is_finite())));
        assert!(report.epoch_losses.iter().all(|l| l.is_finite()));
    }

    #[test]
    fn rejects_bad_inputs() {
        let (m, l) = dataset(10, 3);
        assert!(matches!(train(&[], &[], &small_cfg()), Err(SalienceError::EmptyTrainingSet)));
        let mut other = m.clone();
        other.schema.embedding_dim = 1;
        assert!(matches!(train(&[m.clone(), other], &[l.clone(), l.clone()], &small_cfg()), Err(SalienceError::SchemaMismatch)));
        let short = SalienceLabels { values: vec![0.0] };
        assert!(matches!(train(std::slice::from_ref(&m), &[short], &small_cfg()), Err(SalienceError::LabelCountMismatch(1, 10))));
        let cfg = TrainConfig { batch_size: 0, ..small_cfg() };
        assert!(matches!(train(&[m], &[l], &cfg), Err(SalienceError::InvalidConfig(_))));
    }

    #[test]
    fn roundtrip_preserves_predictions() {
        let (m, l) = dataset(100, 4);
        let model = train(std::slice::from_ref(&m), &[l], &small_cfg()).unwrap().0;
        let back = MlpModel::from_json(&model.to_json()).unwrap();
        for row in &m.rows {
            assert!((model.predict_row(row) - back.predict_row(row)).abs() <= 1e-12);
        }
    }
}
