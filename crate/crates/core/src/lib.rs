//! Extractive slide-deck generation for research papers.
//!
//! The pipeline reads a paper in a small XML format, scores every sentence
//! with an MLP salience regressor, picks sentences with an integer program
//! that trades salience against a character budget and a redundancy bound,
//! groups the picks into titled clusters and renders a two-level bullet deck.
//!
//! | module | role |
//! | ------ | ---- |
//! | [`document`] | paper XML and slide-text parsing |
//! | [`embedding`] | sentence vectors, cosine similarity |
//! | [`features`] | per-sentence feature rows |
//! | [`salience`] | training labels and the MLP regressor |
//! | [`selection`] | exact and heuristic sentence selection, size regression |
//! | [`organize`] | clustering, cluster titles, graphic attachment |
//! | [`render`] | deck text output |
//! | [`metrics`] | ROUGE-1/2/SU4 |
//! | [`pipeline`] | end-to-end composition used by the CLI |

pub mod document;
pub mod embedding;
pub mod error;
pub mod features;
pub mod lexicon;
pub mod metrics;
pub mod organize;
pub mod pipeline;
pub mod render;
pub mod salience;
pub mod selection;
pub mod text;

pub use error::Error;
