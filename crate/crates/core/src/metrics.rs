//! ROUGE-1, ROUGE-2 and ROUGE-SU4 with clipped multiset counting.
//!
//! No stemming or stopword removal is applied. ROUGE-SU4 counts unigrams
//! plus ordered skip-bigrams whose positions differ by at most 5, without a
//! begin-of-sentence marker.

use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;

use thiserror::Error;

use crate::text::tokenize;

/// Largest index difference between the two tokens of a skip-bigram.
pub const SU4_MAX_DISTANCE: usize = 5;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("evaluation corpus is empty")]
    EmptyCorpus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RougeMetric {
    R1,
    R2,
    Su4,
}

impl fmt::Display for RougeMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RougeMetric::R1 => "rouge1",
            RougeMetric::R2 => "rouge2",
            RougeMetric::Su4 => "rouge_su4",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RougeScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub metric: RougeMetric,
}

impl RougeScore {
    fn from_counts(overlap: usize, candidate: usize, reference: usize, metric: RougeMetric) -> Self {
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let precision = ratio(overlap, candidate);
        let recall = ratio(overlap, reference);
        let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
        RougeScore { precision, recall, f1, metric }
    }
}

fn counts<K: Eq + Hash>(items: impl IntoIterator<Item = K>) -> (HashMap<K, usize>, usize) {
    let mut map = HashMap::new();
    let mut total = 0;
    for k in items {
        *map.entry(k).or_insert(0) += 1;
        total += 1;
    }
    (map, total)
}

fn clipped_overlap<K: Eq + Hash>(a: &HashMap<K, usize>, b: &HashMap<K, usize>) -> usize {
    a.iter().map(|(k, &ca)| b.get(k).map_or(0, |&cb| ca.min(cb))).sum()
}

fn score<K: Eq + Hash>(cand: Vec<K>, reference: Vec<K>, metric: RougeMetric) -> RougeScore {
    let (c, c_total) = counts(cand);
    let (r, r_total) = counts(reference);
    RougeScore::from_counts(clipped_overlap(&c, &r), c_total, r_total, metric)
}

/// ROUGE-N for `n` in {1, 2}.
///
/// # Panics
/// If `n` is not 1 or 2.
pub fn rouge_n<T: AsRef<str>>(candidate: &[T], reference: &[T], n: usize) -> RougeScore {
    let metric = match n {
        1 => RougeMetric::R1,
        2 => RougeMetric::R2,
        _ => panic!("rouge_n supports n = 1 or 2, got {n}"),
    };
    let grams =
        |t: &[T]| -> Vec<Vec<String>> { t.windows(n).map(|w| w.iter().map(|s| s.as_ref().to_owned()).collect()).collect() };
    score(grams(candidate), grams(reference), metric)
}

#[derive(PartialEq, Eq, Hash)]
enum Su4Feature {
    Unigram(String),
    Skip(String, String),
}

fn su4_features<T: AsRef<str>>(tokens: &[T]) -> Vec<Su4Feature> {
    let mut out: Vec<Su4Feature> = tokens.iter().map(|t| Su4Feature::Unigram(t.as_ref().to_owned())).collect();
    for i in 0..tokens.len() {
        for j in i + 1..tokens.len().min(i + SU4_MAX_DISTANCE + 1) {
            out.push(Su4Feature::Skip(tokens[i].as_ref().to_owned(), tokens[j].as_ref().to_owned()));
        }
    }
    out
}

pub fn rouge_su4<T: AsRef<str>>(candidate: &[T], reference: &[T]) -> RougeScore {
    score(su4_features(candidate), su4_features(reference), RougeMetric::Su4)
}

/// The three scores for one candidate/reference pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RougeTriple {
    pub rouge1: RougeScore,
    pub rouge2: RougeScore,
    pub su4: RougeScore,
}

pub fn rouge_all<T: AsRef<str>>(candidate: &[T], reference: &[T]) -> RougeTriple {
    RougeTriple {
        rouge1: rouge_n(candidate, reference, 1),
        rouge2: rouge_n(candidate, reference, 2),
        su4: rouge_su4(candidate, reference),
    }
}

/// Unweighted mean F1 scores over a corpus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorpusScores {
    pub pairs: usize,
    pub rouge1_f1: f64,
    pub rouge2_f1: f64,
    pub su4_f1: f64,
}

/// Tokenizes each `(candidate, reference)` text pair and averages the F1
/// scores in input order.
pub fn evaluate_corpus<C: AsRef<str>, R: AsRef<str>>(pairs: &[(C, R)]) -> Result<CorpusScores, MetricsError> {
    if pairs.is_empty() {
        return Err(MetricsError::EmptyCorpus);
    }
    let (mut r1, mut r2, mut su4) = (0.0, 0.0, 0.0);
    for (cand, reference) in pairs {
        let s = rouge_all(&tokenize(cand.as_ref()), &tokenize(reference.as_ref()));
        r1 += s.rouge1.f1;
        r2 += s.rouge2.f1;
        su4 += s.su4.f1;
    }
    let n = pairs.len() as f64;
    Ok(CorpusScores { pairs: pairs.len(), rouge1_f1: r1 / n, rouge2_f1: r2 / n, su4_f1: su4 / n })
}

/// Plain-text table of F1 × 100 with two decimals, one row per algorithm.
pub fn render_table(rows: &[(&str, CorpusScores)]) -> String {
    let header = ["Algorithm", "Rouge 1", "Rouge 2", "Rouge SU4"];
    let body: Vec<[String; 4]> = rows
        .iter()
        .map(|(name, s)| {
            [
                name.to_string(),
                format!("{:.2}", s.rouge1_f1 * 100.0),
                format!("{:.2}", s.rouge2_f1 * 100.0),
                format!("{:.2}", s.su4_f1 * 100.0),
            ]
        })
        .collect();
    let mut widths = header.map(str::len);
    for row in &body {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: [&str; 4]| {
        let mut s = format!("{:<w$}", cells[0], w = widths[0]);
        for k in 1..4 {
            s.push_str(&format!(" | {:>w$}", cells[k], w = widths[k]));
        }
        s.trim_end().to_string() + "\n"
    };
    let mut out = line(header);
    let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
    out.push_str(&rule.join("-|-"));
    out.push('\n');
    for row in &body {
        out.push_str(&line([&row[0], &row[1], &row[2], &row[3]]));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<&str> {
        s.split_whitespace().collect()
    }

    #[test]
    fn cat_mat_unigrams() {
        let s = rouge_n(&toks("the cat sat on the mat"), &toks("the cat ate the mat"), 1);
        assert!((s.precision - 4.0 / 6.0).abs() < 1e-12);
        assert!((s.recall - 4.0 / 5.0).abs() < 1e-12);
        assert!((s.f1 - 16.0 / 22.0).abs() < 1e-12);
    }

    #[test]
    fn cat_mat_bigrams() {
        // Shared bigrams: "the cat", "the mat".
        let s = rouge_n(&toks("the cat sat on the mat"), &toks("the cat ate the mat"), 2);
        assert!((s.precision - 2.0 / 5.0).abs() < 1e-12);
        assert!((s.recall - 2.0 / 4.0).abs() < 1e-12);
    }

    #[test]
    fn su4_small_example() {
        let s = rouge_su4(&toks("a b c"), &toks("a c"));
        assert!((s.precision - 0.5).abs() < 1e-12);
        assert!((s.recall - 1.0).abs() < 1e-12);
        assert!((s.f1 - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn su4_window_limit() {
        let long = toks("a x x x x x b");
        let feats = su4_features(&long);
        assert!(!feats.contains(&Su4Feature::Skip("a".into(), "b".into())));
        assert!(su4_features(&toks("a x x x x b")).contains(&Su4Feature::Skip("a".into(), "b".into())));
    }

    #[test]
    fn degenerate_inputs() {
        let empty: [&str; 0] = [];
        assert_eq!(rouge_n(&empty, &empty, 1).f1, 0.0);
        assert_eq!(rouge_su4(&toks("a"), &toks("a")).f1, rouge_n(&toks("a"), &toks("a"), 1).f1);
        assert_eq!(rouge_n(&toks("a b"), &toks("c d"), 2).f1, 0.0);
    }

    #[test]
    fn corpus_means() {
        let pairs = [("a b c", "a b c"), ("x y", "p q")];
        let s = evaluate_corpus(&pairs).unwrap();
        assert_eq!((s.rouge1_f1, s.rouge2_f1, s.su4_f1), (0.5, 0.5, 0.5));
        let none: [(&str, &str); 0] = [];
        assert_eq!(evaluate_corpus(&none), Err(MetricsError::EmptyCorpus));
    }

    #[test]
    fn table_layout() {
        let s = CorpusScores { pairs: 1, rouge1_f1: 0.3871, rouge2_f1: 0.2784, su4_f1: 0.3165 };
        let t = render_table(&[("deckgen", s)]);
        assert_eq!(
            t,
            "Algorithm | Rouge 1 | Rouge 2 | Rouge SU4\n----------|---------|---------|----------\ndeckgen   |   38.71 |   27.84 |     31.65\n"
        );
    }
}
