//! Target presentation size in characters.

use std::collections::HashSet;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::SelectionError;
use crate::document::{Paper, RefKind};

pub const SIZE_FEATURES: [&str; 8] = [
    "paper_chars",
    "sentence_count",
    "section_count",
    "graphic_count",
    "reference_count",
    "mean_sentence_tokens",
    "mean_sentence_chars",
    "intercept",
];

/// Predictions below this are raised to it (unless the paper itself is shorter).
pub const MIN_PREDICTED_SIZE: usize = 200;

const FORMAT_VERSION: u32 = 1;
const RIDGE: f64 = 1e-8;

/// The seven regressors, in [`SIZE_FEATURES`] order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PaperStats(pub [f64; 7]);

impl PaperStats {
    pub fn from_paper(paper: &Paper) -> Self {
        let sentences = paper.sentence_stream();
        let n = sentences.len().max(1) as f64;
        let chars = paper.total_chars() as f64;
        let tokens: usize = sentences.iter().map(|s| s.tokens.len()).sum();
        let references: HashSet<&str> = sentences
            .iter()
            .flat_map(|s| &s.ref_marks)
            .filter(|r| r.kind == RefKind::Literature)
            .map(|r| r.target.as_str())
            .collect();
        PaperStats([
            chars,
            sentences.len() as f64,
            paper.sections.len() as f64,
            paper.graphics.len() as f64,
            references.len() as f64,
            tokens as f64 / n,
            chars / n,
        ])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SizeModel {
    pub coefficients: [f64; 8],
}

#[derive(Serialize, Deserialize)]
struct SizeModelFile {
    format_version: u32,
    feature_names: Vec<String>,
    coefficients: Vec<f64>,
}

impl SizeModel {
    pub fn evaluate(&self, stats: &PaperStats) -> f64 {
        let slopes: f64 = self.coefficients[..7].iter().zip(&stats.0).map(|(c, x)| c * x).sum();
        slopes + self.coefficients[7]
    }

    pub fn to_json(&self) -> String {
        let file = SizeModelFile {
            format_version: FORMAT_VERSION,
            feature_names: SIZE_FEATURES.iter().map(|s| s.to_string()).collect(),
            coefficients: self.coefficients.to_vec(),
        };
        let mut out = serde_json::to_string_pretty(&file).expect("size model serializes");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> Result<Self, SelectionError> {
        let bad = |m: String| SelectionError::ModelFormat(m);
        let file: SizeModelFile = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
        if file.format_version != FORMAT_VERSION {
            return Err(bad(format!("unsupported format_version {}", file.format_version)));
        }
        if file.feature_names.iter().map(String::as_str).ne(SIZE_FEATURES) {
            return Err(bad(format!("unexpected feature names {:?}", file.feature_names)));
        }
        let coefficients: [f64; 8] =
            file.coefficients.try_into().map_err(|c: Vec<f64>| bad(format!("expected 8 coefficients, got {}", c.len())))?;
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(bad("non-finite coefficient".into()));
        }
        Ok(SizeModel { coefficients })
    }

    pub fn load(path: &Path) -> Result<Self, SelectionError> {
        let text = std::fs::read_to_string(path).map_err(|source| SelectionError::Io { path: path.to_owned(), source })?;
        Self::from_json(&text)
    }
}

/// Regression prediction, rounded and clamped to
/// `[MIN_PREDICTED_SIZE, paper characters]`.
pub fn predict_size(model: &SizeModel, paper: &Paper) -> usize {
    let total = paper.total_chars();
    let raw = model.evaluate(&PaperStats::from_paper(paper)).round();
    let lower = MIN_PREDICTED_SIZE.min(total);
    if raw.is_nan() || raw < lower as f64 {
        lower
    } else if raw > total as f64 {
        total
    } else {
        raw as usize
    }
}

/// `round(fraction × paper characters)`.
pub fn fallback_size(paper: &Paper, fraction: f64) -> usize {
    (fraction * paper.total_chars() as f64).round() as usize
}

/// Least squares through the normal equations.
///
/// Columns are centered and scaled to unit variance before forming `ZᵀZ`,
/// a `1e-8` ridge is added to its diagonal, and the solution is mapped back
/// to raw-feature coefficients with the intercept absorbing the means.
/// Constant columns get a zero coefficient.
pub fn train_size_model(pairs: &[(PaperStats, f64)]) -> Result<SizeModel, SelectionError> {
    const NEEDED: usize = 8;
    if pairs.len() < NEEDED {
        return Err(SelectionError::TooFewPairs { needed: NEEDED, got: pairs.len() });
    }
    if pairs.iter().any(|(s, y)| !y.is_finite() || s.0.iter().any(|x| !x.is_finite())) {
        return Err(SelectionError::InvalidProblem("size regression inputs must be finite".into()));
    }
    let n = pairs.len() as f64;
    let mut means = [0.0; 7];
    let mut y_mean = 0.0;
    for (s, y) in pairs {
        for (m, x) in means.iter_mut().zip(&s.0) {
            *m += x / n;
        }
        y_mean += y / n;
    }
    let mut scales = [0.0; 7];
    for (s, _) in pairs {
        for k in 0..7 {
            scales[k] += (s.0[k] - means[k]).powi(2) / n;
        }
    }
    for s in &mut scales {
        *s = if *s > 0.0 { s.sqrt() } else { 1.0 };
    }

    let z = DMatrix::from_fn(pairs.len(), 7, |r, c| (pairs[r].0 .0[c] - means[c]) / scales[c]);
    let y = DVector::from_iterator(pairs.len(), pairs.iter().map(|(_, y)| y - y_mean));
    let mut gram = z.transpose() * &z;
    for k in 0..7 {
        gram[(k, k)] += RIDGE;
    }
    let rhs = z.transpose() * y;
    let gamma = match gram.clone().cholesky() {
        Some(ch) => ch.solve(&rhs),
        None => gram.lu().solve(&rhs).ok_or_else(|| SelectionError::InvalidProblem("singular normal equations".into()))?,
    };

    let mut coefficients = [0.0; 8];
    let mut intercept = y_mean;
    for k in 0..7 {
        coefficients[k] = gamma[k] / scales[k];
        intercept -= coefficients[k] * means[k];
    }
    coefficients[7] = intercept;
    Ok(SizeModel { coefficients })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::document::parse_paper;

    fn paper_of(chars: usize) -> Paper {
        let body = "x".repeat(chars);
        parse_paper(&format!("<paper><title>T</title><abstract><s>{body}</s></abstract></paper>")).unwrap()
    }

    #[test]
    fn affine_prediction_and_clamps() {
        let paper = paper_of(40_000);
        let mut m = SizeModel { coefficients: [0.0; 8] };
        m.coefficients[7] = 5000.0;
        assert_eq!(predict_size(&m, &paper), 5000);
        m.coefficients[7] = -10.0;
        assert_eq!(predict_size(&m, &paper), 200);
        m.coefficients[7] = 1e9;
        assert_eq!(predict_size(&m, &paper), 40_000);
        m.coefficients[7] = 500.0;
        assert_eq!(predict_size(&m, &paper_of(150)), 150);
    }

    #[test]
    fn fallback_is_twenty_percent() {
        assert_eq!(fallback_size(&paper_of(40_000), 0.20), 8000);
        assert_eq!(fallback_size(&paper_of(13), 0.20), 3);
    }

    #[test]
    fn stats_from_paper() {
        let xml = r#"<paper><title>T</title><abstract><s>One two <ref type="literature" target="b1"/>.</s></abstract>
            <section><s>Three <ref type="literature" target="b1"/> <ref type="literature" target="b2"/>.</s></section>
            <graphic id="f" kind="figure"/></paper>"#;
        let p = parse_paper(xml).unwrap();
        let s = PaperStats::from_paper(&p);
        // "One two [b1]." has 13 chars and 3 tokens, "Three [b1] [b2]." 16 and 3.
        assert_eq!(s.0, [29.0, 2.0, 1.0, 1.0, 2.0, 3.0, 14.5]);
    }

    #[test]
    fn too_few_pairs() {
        let pairs = vec![(PaperStats([1.0; 7]), 1.0); 7];
        assert!(matches!(train_size_model(&pairs), Err(SelectionError::TooFewPairs { needed: 8, got: 7 })));
    }

    #[test]
    fn json_roundtrip() {
        let m = SizeModel { coefficients: [0.1, -2.0, 3.5, 0.0, 1e-7, 12.0, 0.25, 100.0] };
        assert_eq!(SizeModel::from_json(&m.to_json()).unwrap(), m);
        assert!(SizeModel::from_json(r#"{"format_version":1,"feature_names":[],"coefficients":[]}"#).is_err());
    }
}
