//! Sentence selection.
//!
//! Maximize `Σ L_i·S_i·X_i` over binary `X` subject to a character budget
//! `Σ L_i·X_i ≤ Size` and a redundancy bound: when two or more sentences are
//! chosen, their mean pairwise cosine similarity must not exceed `Θ`.
//!
//! The redundancy bound is a ratio of quadratic forms. Multiplying through by
//! the (positive) pair count turns it into `Σ_{i<j} (sim_ij − Θ)·X_i·X_j ≤ 0`,
//! which is what both solvers track. Empty and singleton selections have no
//! pairs and satisfy it vacuously.
//!
//! All sums over a selection run in ascending index order, so objectives
//! computed by different code paths compare bit-for-bit.

mod exact;
mod heuristic;
mod size;

pub use exact::{select_exact, DEFAULT_EXACT_CAP};
pub use heuristic::select_heuristic;
pub use size::{fallback_size, predict_size, train_size_model, PaperStats, SizeModel, MIN_PREDICTED_SIZE, SIZE_FEATURES};

use std::path::PathBuf;

use thiserror::Error;

use crate::embedding::{cosine_unchecked, Embedding};

pub const DEFAULT_THETA: f64 = 0.55;

/// Slack allowed on the linearized redundancy sum.
pub const REDUNDANCY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum SelectionError {
    #[error("{n} sentences exceed the exact solver cap of {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("invalid selection problem: {0}")]
    InvalidProblem(String),
    #[error("size regression needs at least {needed} pairs, got {got}")]
    TooFewPairs { needed: usize, got: usize },
    #[error("size model: {0}")]
    ModelFormat(String),
    #[error("reading {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionProblem {
    lengths: Vec<usize>,
    scores: Vec<f64>,
    sims: Vec<f64>,
    size_budget: usize,
    theta: f64,
}

impl SelectionProblem {
    /// `sims` is the full row-major `n × n` similarity matrix.
    pub fn new(
        lengths: Vec<usize>,
        scores: Vec<f64>,
        sims: Vec<f64>,
        size_budget: usize,
        theta: f64,
    ) -> Result<Self, SelectionError> {
        let n = lengths.len();
        let bad = |m: String| Err(SelectionError::InvalidProblem(m));
        if scores.len() != n || sims.len() != n * n {
            return bad(format!("{n} lengths, {} scores, {} similarity entries", scores.len(), sims.len()));
        }
        if lengths.contains(&0) {
            return bad("sentence lengths must be positive".into());
        }
        if scores.iter().chain(&sims).any(|v| !v.is_finite()) || !theta.is_finite() {
            return bad("scores, similarities and theta must be finite".into());
        }
        for i in 0..n {
            if (sims[i * n + i] - 1.0).abs() > 1e-9 {
                return bad(format!("similarity diagonal at {i} is {}", sims[i * n + i]));
            }
            for j in 0..i {
                if (sims[i * n + j] - sims[j * n + i]).abs() > 1e-9 {
                    return bad(format!("similarity matrix not symmetric at ({i}, {j})"));
                }
            }
        }
        Ok(SelectionProblem { lengths, scores, sims, size_budget, theta })
    }

    /// Builds the similarity matrix from sentence vectors. The diagonal is
    /// set to exactly 1.
    pub fn from_embeddings(
        lengths: Vec<usize>,
        scores: Vec<f64>,
        vectors: &[&Embedding],
        size_budget: usize,
        theta: f64,
    ) -> Result<Self, SelectionError> {
        let n = vectors.len();
        let mut sims = vec![1.0; n * n];
        for i in 0..n {
            for j in 0..i {
                let c = cosine_unchecked(vectors[i].components(), vectors[j].components());
                sims[i * n + j] = c;
                sims[j * n + i] = c;
            }
        }
        Self::new(lengths, scores, sims, size_budget, theta)
    }

    pub fn len(&self) -> usize {
        self.lengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lengths.is_empty()
    }

    pub fn lengths(&self) -> &[usize] {
        &self.lengths
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn size_budget(&self) -> usize {
        self.size_budget
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn sim(&self, i: usize, j: usize) -> f64 {
        self.sims[i * self.lengths.len() + j]
    }

    pub(crate) fn gain(&self, i: usize) -> f64 {
        self.lengths[i] as f64 * self.scores[i]
    }

    /// Objective, total length and linearized redundancy sum of a sorted
    /// index set, accumulated in ascending order.
    pub fn measure(&self, chosen: &[usize]) -> (f64, usize, f64) {
        let mut objective = 0.0;
        let mut length = 0;
        let mut redundancy = 0.0;
        for (k, &j) in chosen.iter().enumerate() {
            objective += self.gain(j);
            length += self.lengths[j];
            for &i in &chosen[..k] {
                redundancy += self.sim(i, j) - self.theta;
            }
        }
        (objective, length, redundancy)
    }

    pub fn is_feasible(&self, chosen: &[usize]) -> bool {
        let (_, length, redundancy) = self.measure(chosen);
        length <= self.size_budget && (chosen.len() < 2 || redundancy <= REDUNDANCY_TOLERANCE)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    /// Ascending sentence indices.
    pub chosen: Vec<usize>,
    pub objective: f64,
    /// Mean pairwise similarity of the chosen set; 0 with fewer than two.
    pub avg_similarity: f64,
    pub total_length: usize,
}

impl Selection {
    pub fn evaluate(problem: &SelectionProblem, mut chosen: Vec<usize>) -> Self {
        chosen.sort_unstable();
        let (objective, total_length, _) = problem.measure(&chosen);
        let mut sum = 0.0;
        let mut pairs = 0usize;
        for (k, &j) in chosen.iter().enumerate() {
            for &i in &chosen[..k] {
                sum += problem.sim(i, j);
                pairs += 1;
            }
        }
        let avg_similarity = if pairs == 0 { 0.0 } else { sum / pairs as f64 };
        Selection { chosen, objective, avg_similarity, total_length }
    }

    pub fn empty() -> Self {
        Selection { chosen: Vec::new(), objective: 0.0, avg_similarity: 0.0, total_length: 0 }
    }
}
