//! Salience labels and the MLP regressor that predicts them.
//!
//! A paper sentence's label is its best cosine match against the reference
//! presentation: `max_j cos(paper_i, slide_j)`. The regressor learns to
//! predict that label from the sentence's feature row.

mod mlp;
mod train;

pub use mlp::{gradient_check, predict, Layer, MlpModel, Normalizer, MODEL_FORMAT_VERSION};
pub use train::{train, TrainConfig, TrainReport};

use std::path::PathBuf;

use thiserror::Error;

use crate::embedding::{cosine_unchecked, Embedding};

#[derive(Debug, Error)]
pub enum SalienceError {
    #[error("reference presentation has no sentences")]
    EmptyReference,
    #[error("embedding dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("feature schema does not match the model schema")]
    SchemaMismatch,
    #[error("{0} labels for {1} feature rows")]
    LabelCountMismatch(usize, usize),
    #[error("no training rows")]
    EmptyTrainingSet,
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("training loss became non-finite at epoch {0}")]
    Diverged(usize),
    #[error("model file: {0}")]
    ModelFormat(String),
    #[error("reading {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SalienceLabels {
    pub values: Vec<f64>,
}

/// One label per paper vector: its maximum cosine similarity with any
/// slide vector.
pub fn label_salience(paper_vecs: &[Embedding], slide_vecs: &[Embedding]) -> Result<SalienceLabels, SalienceError> {
    let Some(first) = slide_vecs.first() else {
        return Err(SalienceError::EmptyReference);
    };
    let dim = first.dim();
    if let Some(bad) = paper_vecs.iter().chain(slide_vecs).find(|v| v.dim() != dim) {
        return Err(SalienceError::DimensionMismatch { expected: dim, found: bad.dim() });
    }
    let values = paper_vecs
        .iter()
        .map(|p| slide_vecs.iter().map(|s| cosine_unchecked(p.components(), s.components())).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    Ok(SalienceLabels { values })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[f64]) -> Embedding {
        Embedding::from_raw(c.to_vec())
    }

    #[test]
    fn label_examples() {
        let ep = [v(&[1.0, 0.0])];
        assert_eq!(label_salience(&ep, &[v(&[0.0, 1.0]), v(&[1.0, 0.0])]).unwrap().values, [1.0]);
        assert_eq!(label_salience(&ep, &[v(&[0.0, 1.0])]).unwrap().values, [0.0]);
        let h = 0.5f64.sqrt();
        let got = label_salience(&ep, &[v(&[0.0, 1.0]), v(&[h, h])]).unwrap().values[0];
        assert!((got - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-8);
    }

    #[test]
    fn empty_reference() {
        assert!(matches!(label_salience(&[v(&[1.0, 0.0])], &[]), Err(SalienceError::EmptyReference)));
    }

    #[test]
    fn order_free() {
        let ep = [v(&[0.3, 0.9, 0.1]), v(&[-1.0, 0.2, 0.0])];
        let es = [v(&[0.1, 0.1, 1.0]), v(&[0.5, 0.5, 0.0]), v(&[-0.2, 0.0, 0.3])];
        let a = label_salience(&ep, &es).unwrap();
        let rev: Vec<_> = es.iter().rev().cloned().collect();
        assert_eq!(a, label_salience(&ep, &rev).unwrap());
    }
}
