use std::path::Path;

use serde::{Deserialize, Serialize};

use super::SalienceError;
use crate::features::{FeatureMatrix, FeatureSchema};

pub const MODEL_FORMAT_VERSION: u32 = 1;
const HIDDEN_LAYERS: usize = 3;

/// Dense layer, `rows` outputs by `cols` inputs, weights row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub rows: usize,
    pub cols: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Layer {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Layer { rows, cols, weights: vec![0.0; rows * cols], bias: vec![0.0; rows] }
    }

    fn affine(&self, input: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for (r, b) in self.bias.iter().enumerate() {
            let w = &self.weights[r * self.cols..(r + 1) * self.cols];
            out.push(b + w.iter().zip(input).map(|(w, x)| w * x).sum::<f64>());
        }
    }

    fn param_count(&self) -> usize {
        self.weights.len() + self.bias.len()
    }
}

/// Per-column z-score parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl Normalizer {
    pub fn identity(width: usize) -> Self {
        Normalizer { means: vec![0.0; width], stds: vec![1.0; width] }
    }

    /// Population mean and std per column; zero-variance columns get std 1.
    pub fn fit(rows: &[&[f64]], width: usize) -> Self {
        let n = rows.len().max(1) as f64;
        let mut means = vec![0.0; width];
        for row in rows {
            for (m, x) in means.iter_mut().zip(row.iter()) {
                *m += x;
            }
        }
        means.iter_mut().for_each(|m| *m /= n);
        let mut stds = vec![0.0; width];
        for row in rows {
            for ((s, x), m) in stds.iter_mut().zip(row.iter()).zip(&means) {
                *s += (x - m) * (x - m);
            }
        }
        for s in &mut stds {
            *s = (*s / n).sqrt();
            if *s < 1e-12 {
                *s = 1.0;
            }
        }
        Normalizer { means, stds }
    }

    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        row.iter().zip(&self.means).zip(&self.stds).map(|((x, m), s)| (x - m) / s).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    schema: FeatureSchema,
    normalizer: Normalizer,
    layers: Vec<Layer>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    schema: FeatureSchema,
    normalizer: Normalizer,
    layers: Vec<Layer>,
    hidden_activation: String,
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl MlpModel {
    /// Checks that the layers chain from the schema width to a single output
    /// through exactly three hidden layers.
    pub fn new(schema: FeatureSchema, normalizer: Normalizer, layers: Vec<Layer>) -> Result<Self, SalienceError> {
        let bad = |m: String| Err(SalienceError::ModelFormat(m));
        let width = schema.width();
        if normalizer.means.len() != width || normalizer.stds.len() != width {
            return bad(format!("normalizer width differs from schema width {width}"));
        }
        if normalizer.stds.iter().any(|s| !(s.is_finite() && *s > 0.0)) || normalizer.means.iter().any(|m| !m.is_finite()) {
            return bad("normalizer entries must be finite with positive stds".into());
        }
        if layers.len() != HIDDEN_LAYERS + 1 {
            return bad(format!("expected {} layers, found {}", HIDDEN_LAYERS + 1, layers.len()));
        }
        let mut expected_cols = width;
        for (i, layer) in layers.iter().enumerate() {
            if layer.cols != expected_cols || layer.rows == 0 {
                return bad(format!("layer {i} has shape {}x{}, expected {expected_cols} inputs", layer.rows, layer.cols));
            }
            if layer.weights.len() != layer.rows * layer.cols || layer.bias.len() != layer.rows {
                return bad(format!("layer {i} parameter count does not match its shape"));
            }
            if layer.weights.iter().chain(&layer.bias).any(|v| !v.is_finite()) {
                return bad(format!("layer {i} has non-finite parameters"));
            }
            expected_cols = layer.rows;
        }
        if expected_cols != 1 {
            return bad(format!("output layer has {expected_cols} units, expected 1"));
        }
        Ok(MlpModel { schema, normalizer, layers })
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn normalizer(&self) -> &Normalizer {
        &self.normalizer
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub(crate) fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Layer::param_count).sum()
    }

    /// Output for an already-normalized row.
    pub(crate) fn forward_normalized(&self, x: &[f64]) -> f64 {
        let mut a = x.to_vec();
        let mut z = Vec::new();
        for (i, layer) in self.layers.iter().enumerate() {
            layer.affine(&a, &mut z);
            if i < HIDDEN_LAYERS {
                a = z.iter().map(|&v| sigmoid(v)).collect();
            } else {
                return z[0];
            }
        }
        unreachable!("model always has an output layer")
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.forward_normalized(&self.normalizer.apply(row))
    }

    /// Adds `scale` times the squared-error gradient for one normalized row
    /// into `grads`. Returns the prediction.
    pub(crate) fn accumulate_gradients(&self, x: &[f64], label: f64, scale: f64, grads: &mut [Layer]) -> f64 {
        let mut activations: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len());
        activations.push(x.to_vec());
        let mut z = Vec::new();
        for (i, layer) in self.layers.iter().enumerate() {
            layer.affine(activations.last().expect("non-empty"), &mut z);
            if i < HIDDEN_LAYERS {
                activations.push(z.iter().map(|&v| sigmoid(v)).collect());
            }
        }
        let pred = z[0];

        let mut delta = vec![scale * 2.0 * (pred - label)];
        for l in (0..self.layers.len()).rev() {
            let layer = &self.layers[l];
            let input = &activations[l];
            let g = &mut grads[l];
            for (r, d) in delta.iter().enumerate() {
                g.bias[r] += d;
                let row = &mut g.weights[r * layer.cols..(r + 1) * layer.cols];
                for (w, a) in row.iter_mut().zip(input) {
                    *w += d * a;
                }
            }
            if l == 0 {
                break;
            }
            let mut next = vec![0.0; layer.cols];
            for (r, d) in delta.iter().enumerate() {
                let w = &layer.weights[r * layer.cols..(r + 1) * layer.cols];
                for (n, w) in next.iter_mut().zip(w) {
                    *n += w * d;
                }
            }
            for (n, a) in next.iter_mut().zip(input) {
                *n *= a * (1.0 - a);
            }
            delta = next;
        }
        pred
    }

    pub(crate) fn zero_grads(&self) -> Vec<Layer> {
        self.layers.iter().map(|l| Layer::zeros(l.rows, l.cols)).collect()
    }

    pub fn to_json(&self) -> String {
        let file = ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            schema: self.schema.clone(),
            normalizer: self.normalizer.clone(),
            layers: self.layers.clone(),
            hidden_activation: "sigmoid".into(),
        };
        let mut out = serde_json::to_string(&file).expect("model serializes");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> Result<Self, SalienceError> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| SalienceError::ModelFormat(e.to_string()))?;
        if file.format_version != MODEL_FORMAT_VERSION {
            return Err(SalienceError::ModelFormat(format!("unsupported format_version {}", file.format_version)));
        }
        if file.hidden_activation != "sigmoid" {
            return Err(SalienceError::ModelFormat(format!("unsupported hidden_activation {:?}", file.hidden_activation)));
        }
        MlpModel::new(file.schema, file.normalizer, file.layers)
    }

    pub fn load(path: &Path) -> Result<Self, SalienceError> {
        let text = std::fs::read_to_string(path).map_err(|source| SalienceError::Io { path: path.to_owned(), source })?;
        Self::from_json(&text)
    }
}

/// Scores every row of `features`.
pub fn predict(model: &MlpModel, features: &FeatureMatrix) -> Result<Vec<f64>, SalienceError> {
    if features.schema != model.schema {
        return Err(SalienceError::SchemaMismatch);
    }
    Ok(features.rows.iter().map(|r| model.predict_row(r)).collect())
}

fn param_mut(model: &mut MlpModel, layer: usize, k: usize) -> &mut f64 {
    let layer = &mut model.layers[layer];
    let n_w = layer.weights.len();
    if k < n_w {
        &mut layer.weights[k]
    } else {
        &mut layer.bias[k - n_w]
    }
}

/// Largest relative disagreement between the backprop gradient of the
/// squared error on `(row, label)` and central finite differences
/// (h = 1e-5), over every weight and bias.
pub fn gradient_check(model: &MlpModel, row: &[f64], label: f64) -> f64 {
    const H: f64 = 1e-5;
    let x = model.normalizer.apply(row);
    let mut analytic = model.zero_grads();
    model.accumulate_gradients(&x, label, 1.0, &mut analytic);

    let loss = |m: &MlpModel| {
        let e = m.forward_normalized(&x) - label;
        e * e
    };
    let mut probe = model.clone();
    let mut worst = 0.0f64;
    for (l, grads) in analytic.iter().enumerate() {
        let n_w = grads.weights.len();
        let n_b = grads.bias.len();
        for k in 0..n_w + n_b {
            let original = *param_mut(&mut probe, l, k);
            *param_mut(&mut probe, l, k) = original + H;
            let up = loss(&probe);
            *param_mut(&mut probe, l, k) = original - H;
            let down = loss(&probe);
            *param_mut(&mut probe, l, k) = original;
            let numeric = (up - down) / (2.0 * H);
            let a = if k < n_w { grads.weights[k] } else { grads.bias[k - n_w] };
            let rel = (a - numeric).abs() / (1e-8f64).max(a.abs() + numeric.abs());
            worst = worst.max(rel);
        }
    }
    worst
}
