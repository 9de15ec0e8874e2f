//! Per-sentence feature rows: surface, semantic and contextual groups.
//!
//! Column order is frozen by [`SCALAR_FEATURES`] followed by the sentence's
//! own embedding components. A model file records the schema it was trained
//! with, and prediction refuses a matrix built with any other schema.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::document::{Paper, RefKind, Sentence};
use crate::embedding::{cosine_unchecked, Embedding, EmbeddingError, EmbeddingProvider};
use crate::lexicon::Lexicon;

pub const SCALAR_FEATURES: [&str; 30] = [
    "ref_literature",
    "ref_table",
    "ref_figure",
    "ref_equation",
    "section_abstract",
    "section_introduction",
    "section_background",
    "section_model",
    "section_results",
    "section_conclusion",
    "section_acknowledgement",
    "position_in_section",
    "noun_phrases",
    "verb_phrases",
    "sub_sentences",
    "stopword_ratio",
    "char_length",
    "token_count",
    "parse_depth",
    "mean_tf",
    "mean_idf",
    "sim_title",
    "sim_section_title",
    "sim_abstract",
    "sim_prev_1",
    "sim_prev_2",
    "sim_prev_3",
    "sim_next_1",
    "sim_next_2",
    "sim_next_3",
];

/// Column offsets into a feature row.
pub mod col {
    pub const REF_LITERATURE: usize = 0;
    pub const SECTION_ONE_HOT: usize = 4;
    pub const POSITION: usize = 11;
    pub const NOUN_PHRASES: usize = 12;
    pub const VERB_PHRASES: usize = 13;
    pub const SUB_SENTENCES: usize = 14;
    pub const STOPWORD_RATIO: usize = 15;
    pub const CHAR_LENGTH: usize = 16;
    pub const TOKEN_COUNT: usize = 17;
    pub const PARSE_DEPTH: usize = 18;
    pub const MEAN_TF: usize = 19;
    pub const MEAN_IDF: usize = 20;
    pub const SIM_TITLE: usize = 21;
    pub const SIM_SECTION_TITLE: usize = 22;
    pub const SIM_ABSTRACT: usize = 23;
    pub const SIM_PREV: usize = 24;
    pub const SIM_NEXT: usize = 27;
    pub const EMBEDDING: usize = 30;
}

const SUBORDINATORS: [&str; 12] =
    ["that", "which", "because", "although", "while", "when", "if", "since", "whereas", "who", "whose", "where"];
const MAX_PARSE_DEPTH: usize = 10;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("expected {expected} sentence embeddings, got {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("corpus stats line {line}: {message}")]
    StatsFormat { line: usize, message: String },
    #[error("non-finite feature at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error("reading {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub scalar_names: Vec<String>,
    pub embedding_dim: usize,
}

impl FeatureSchema {
    pub fn standard(embedding_dim: usize) -> Self {
        FeatureSchema { scalar_names: SCALAR_FEATURES.iter().map(|s| s.to_string()).collect(), embedding_dim }
    }

    pub fn width(&self) -> usize {
        self.scalar_names.len() + self.embedding_dim
    }

    /// All column names, embedding columns as `emb_0..`.
    pub fn column_names(&self) -> Vec<String> {
        let mut names = self.scalar_names.clone();
        names.extend((0..self.embedding_dim).map(|i| format!("emb_{i}")));
        names
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub schema: FeatureSchema,
    pub rows: Vec<Vec<f64>>,
}

impl FeatureMatrix {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Header line plus one tab-separated row per sentence.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("global_index\t");
        out.push_str(&self.schema.column_names().join("\t"));
        out.push('\n');
        for (i, row) in self.rows.iter().enumerate() {
            out.push_str(&i.to_string());
            for v in row {
                out.push('\t');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }
}

/// Document frequencies plus the word lists the surface features need.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusStats {
    pub doc_count: u64,
    pub doc_frequency: HashMap<String, u64>,
    pub lexicon: Lexicon,
}

impl CorpusStats {
    /// Counts document frequencies over `documents`, each a token list.
    /// An empty corpus counts as a single empty document so IdF stays finite.
    pub fn from_documents<'a, I, D>(documents: I) -> Self
    where
        I: IntoIterator<Item = D>,
        D: IntoIterator<Item = &'a String>,
    {
        let mut doc_frequency: HashMap<String, u64> = HashMap::new();
        let mut doc_count = 0u64;
        for doc in documents {
            doc_count += 1;
            let mut seen: Vec<&String> = doc.into_iter().collect();
            seen.sort_unstable();
            seen.dedup();
            for word in seen {
                *doc_frequency.entry(word.clone()).or_default() += 1;
            }
        }
        CorpusStats { doc_count: doc_count.max(1), doc_frequency, lexicon: Lexicon::bundled() }
    }

    /// Stats computed from the sentence tokens of each paper.
    pub fn from_papers<'a>(papers: impl IntoIterator<Item = &'a Paper>) -> Self {
        let docs: Vec<Vec<&String>> =
            papers.into_iter().map(|p| p.sentence_stream().into_iter().flat_map(|s| s.tokens.iter()).collect()).collect();
        Self::from_documents(docs)
    }

    /// Parses `#docs=N` followed by `word<TAB>df` rows.
    pub fn parse(text: &str) -> Result<Self, FeatureError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let bad = |line: usize, message: String| FeatureError::StatsFormat { line, message };
        let (_, header) = lines.next().ok_or_else(|| bad(1, "missing #docs header".into()))?;
        let doc_count: u64 = header
            .trim()
            .strip_prefix("#docs=")
            .and_then(|n| n.parse().ok())
            .ok_or_else(|| bad(1, format!("bad header {header:?}")))?;
        if doc_count == 0 {
            return Err(bad(1, "document count must be positive".into()));
        }
        let mut doc_frequency = HashMap::new();
        for (i, line) in lines {
            let (word, df) = line.split_once('\t').ok_or_else(|| bad(i + 1, "expected word<TAB>df".into()))?;
            let df: u64 = df.trim().parse().map_err(|_| bad(i + 1, format!("bad df {df:?}")))?;
            if df > doc_count {
                return Err(bad(i + 1, format!("df {df} exceeds document count {doc_count}")));
            }
            if word.is_empty() || doc_frequency.insert(word.to_owned(), df).is_some() {
                return Err(bad(i + 1, format!("empty or duplicate word {word:?}")));
            }
        }
        Ok(CorpusStats { doc_count, doc_frequency, lexicon: Lexicon::bundled() })
    }

    pub fn load(path: &Path) -> Result<Self, FeatureError> {
        let text = std::fs::read_to_string(path).map_err(|source| FeatureError::Io { path: path.to_owned(), source })?;
        Self::parse(&text)
    }

    /// Serializes in the `parse` format, rows sorted by word.
    pub fn to_tsv(&self) -> String {
        let mut words: Vec<_> = self.doc_frequency.iter().collect();
        words.sort();
        let mut out = format!("#docs={}\n", self.doc_count);
        for (w, df) in words {
            out.push_str(&format!("{w}\t{df}\n"));
        }
        out
    }

    pub fn idf(&self, word: &str) -> f64 {
        let df = self.doc_frequency.get(word).copied().unwrap_or(0);
        (self.doc_count as f64 / (1.0 + df as f64)).ln()
    }
}

/// Vectors for every sentence plus the title and section headings.
#[derive(Debug, Clone, PartialEq)]
pub struct PaperEmbeddings {
    pub sentences: Vec<Embedding>,
    pub title: Embedding,
    pub section_titles: Vec<Embedding>,
}

impl PaperEmbeddings {
    pub fn compute(paper: &Paper, provider: &dyn EmbeddingProvider) -> Result<Self, EmbeddingError> {
        let texts: Vec<&str> = paper.sentence_stream().iter().map(|s| s.text.as_str()).collect();
        let sentences = provider.embed(&texts)?;
        let title = provider.embed_one(&paper.title)?;
        let names: Vec<&str> = paper.sections.iter().map(|s| s.name.as_str()).collect();
        let section_titles = provider.embed(&names)?;
        Ok(PaperEmbeddings { sentences, title, section_titles })
    }

    pub fn dim(&self) -> usize {
        self.title.dim()
    }
}

pub fn sub_sentence_count(raw: &str) -> usize {
    let semicolons = raw.matches(';').count();
    let joins = [", and", ", but", ", or"]
        .iter()
        .map(|pat| {
            raw.match_indices(pat).filter(|(at, _)| !raw[at + pat.len()..].starts_with(|c: char| c.is_alphanumeric())).count()
        })
        .sum::<usize>();
    1 + semicolons + joins
}

pub fn parse_depth_proxy(tokens: &[String]) -> usize {
    let subordinate = tokens.iter().filter(|t| SUBORDINATORS.contains(&t.as_str())).count();
    (1 + subordinate).min(MAX_PARSE_DEPTH)
}

pub fn extract_features(paper: &Paper, embeddings: &PaperEmbeddings, stats: &CorpusStats) -> Result<FeatureMatrix, FeatureError> {
    let sentences = paper.sentence_stream();
    if embeddings.sentences.len() != sentences.len() {
        return Err(FeatureError::LengthMismatch { expected: sentences.len(), found: embeddings.sentences.len() });
    }
    if embeddings.section_titles.len() != paper.sections.len() {
        return Err(FeatureError::LengthMismatch { expected: paper.sections.len(), found: embeddings.section_titles.len() });
    }
    let dim = embeddings.dim();
    for v in embeddings.sentences.iter().chain(&embeddings.section_titles) {
        if v.dim() != dim {
            return Err(EmbeddingError::DimensionMismatch { expected: dim, found: v.dim() }.into());
        }
    }

    let mut term_counts: HashMap<&str, usize> = HashMap::new();
    let mut total_tokens = 0usize;
    for s in &sentences {
        for t in &s.tokens {
            *term_counts.entry(t.as_str()).or_default() += 1;
            total_tokens += 1;
        }
    }
    let tf = |word: &str| term_counts.get(word).copied().unwrap_or(0) as f64 / total_tokens.max(1) as f64;
    let abstract_centroid = Embedding::centroid(&embeddings.sentences[..paper.abstract_sentences.len()], dim);

    let schema = FeatureSchema::standard(dim);
    let mut rows = Vec::with_capacity(sentences.len());
    for (i, sentence) in sentences.iter().enumerate() {
        let mut row = Vec::with_capacity(schema.width());
        surface_features(paper, sentence, stats, &tf, &mut row);

        let own = embeddings.sentences[i].components();
        row.push(cosine_unchecked(own, embeddings.title.components()));
        row.push(match sentence.section_index {
            Some(sec) => cosine_unchecked(own, embeddings.section_titles[sec].components()),
            None => 0.0,
        });
        row.push(cosine_unchecked(own, abstract_centroid.components()));
        for back in 1..=3 {
            row.push(i.checked_sub(back).map_or(0.0, |j| cosine_unchecked(own, embeddings.sentences[j].components())));
        }
        for ahead in 1..=3 {
            row.push(embeddings.sentences.get(i + ahead).map_or(0.0, |v| cosine_unchecked(own, v.components())));
        }
        row.extend_from_slice(own);

        if let Some(column) = row.iter().position(|v| !v.is_finite()) {
            return Err(FeatureError::NonFinite { row: i, column });
        }
        rows.push(row);
    }
    Ok(FeatureMatrix { schema, rows })
}

fn surface_features(paper: &Paper, sentence: &Sentence, stats: &CorpusStats, tf: &dyn Fn(&str) -> f64, row: &mut Vec<f64>) {
    for kind in [RefKind::Literature, RefKind::Table, RefKind::Figure, RefKind::Equation] {
        row.push(sentence.ref_marks.iter().filter(|r| r.kind == kind).count() as f64);
    }
    let mut one_hot = [0.0; 7];
    if let Some(slot) = paper.section_kind_of(sentence).one_hot_slot() {
        one_hot[slot] = 1.0;
    }
    row.extend_from_slice(&one_hot);
    row.push(sentence.position_in_section as f64 / paper.block_len_of(sentence) as f64);

    let tokens = &sentence.tokens;
    let lex = &stats.lexicon;
    row.push(lex.noun_phrases(tokens).len() as f64);
    row.push(lex.verb_phrase_count(tokens) as f64);
    row.push(sub_sentence_count(&sentence.text) as f64);
    let stop = tokens.iter().filter(|t| lex.is_stopword(t)).count();
    row.push(stop as f64 / tokens.len().max(1) as f64);
    row.push(sentence.char_len() as f64);
    row.push(tokens.len() as f64);
    row.push(parse_depth_proxy(tokens) as f64);
    if tokens.is_empty() {
        row.extend([0.0, 0.0]);
    } else {
        let n = tokens.len() as f64;
        row.push(tokens.iter().map(|t| tf(t)).sum::<f64>() / n);
        row.push(tokens.iter().map(|t| stats.idf(t)).sum::<f64>() / n);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::document::parse_paper;
    use crate::embedding::HashedProvider;

    fn build(xml: &str, stats: &CorpusStats) -> (Paper, PaperEmbeddings, FeatureMatrix) {
        let paper = parse_paper(xml).unwrap();
        let emb = PaperEmbeddings::compute(&paper, &HashedProvider::new(16).unwrap()).unwrap();
        let m = extract_features(&paper, &emb, stats).unwrap();
        (paper, emb, m)
    }

    #[test]
    fn single_sentence_paper() {
        let stats = CorpusStats::from_documents(Vec::<Vec<&String>>::new());
        let (_, _, m) = build("<paper><title>T</title><section kind='results'><s>Only one here.</s></section></paper>", &stats);
        let row = &m.rows[0];
        assert_eq!(row.len(), 30 + 16);
        assert_eq!(&row[col::SIM_PREV..col::EMBEDDING], &[0.0; 6]);
        assert_eq!(row[col::POSITION], 1.0);
        assert_eq!(&row[col::SECTION_ONE_HOT..col::POSITION], &[0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn reference_counts() {
        let stats = CorpusStats::from_documents(Vec::<Vec<&String>>::new());
        let xml = r#"<paper><title>T</title><abstract><s>See <ref type="figure" target="fig1"/> and <ref type="table" target="tab2"/>.</s></abstract></paper>"#;
        let (p, _, m) = build(xml, &stats);
        assert_eq!(p.abstract_sentences[0].text, "See [fig1] and [tab2].");
        assert_eq!(&m.rows[0][0..4], &[0.0, 1.0, 1.0, 0.0]);
        assert_eq!(m.rows[0][col::SIM_SECTION_TITLE], 0.0);
    }

    #[test]
    fn stopword_ratio_and_tf_idf_by_hand() {
        // 10 tokens, of which the/was/on/a are stopwords.
        let text = "the cat was on a mat dog sat rug log";
        let lex = Lexicon::bundled();
        let stop: Vec<_> = crate::text::tokenize(text).into_iter().filter(|t| lex.is_stopword(t)).collect();
        assert_eq!(stop, ["the", "was", "on", "a"]);

        // Toy corpus of two documents: doc A = {cat, mat}, doc B = {cat, dog}.
        let a: Vec<String> = vec!["cat".into(), "mat".into()];
        let b: Vec<String> = vec!["cat".into(), "dog".into()];
        let stats = CorpusStats::from_documents([&a, &b]);
        assert_eq!(stats.doc_count, 2);
        let xml = format!("<paper><title>T</title><abstract><s>{text}</s></abstract></paper>");
        let (_, _, m) = build(&xml, &stats);
        let row = &m.rows[0];
        assert!((row[col::STOPWORD_RATIO] - 0.4).abs() < 1e-12);
        // Every token occurs once in the paper of 10 tokens: TF = 1/10 each.
        assert!((row[col::MEAN_TF] - 0.1).abs() < 1e-12);
        // IdF: cat df=2 → ln(2/3); mat, dog df=1 → ln(2/2)=0; the other 7 unseen → ln(2).
        let expected_idf = ((2.0f64 / 3.0).ln() + 7.0 * 2.0f64.ln()) / 10.0;
        assert!((row[col::MEAN_IDF] - expected_idf).abs() < 1e-12);
    }

    #[test]
    fn position_and_context_features() {
        let stats = CorpusStats::from_documents(Vec::<Vec<&String>>::new());
        let xml = "<paper><title>Graph models</title><abstract><s>We study graphs.</s><s>Graphs are nice.</s></abstract>
            <section name='Intro' kind='introduction'><s>Intro one.</s><s>Intro two about graphs.</s><s>Intro three.</s></section>
            <section name='Misc' kind='misc'><s>Other text.</s></section></paper>";
        let (paper, emb, m) = build(xml, &stats);
        let positions: Vec<f64> = m.rows.iter().map(|r| r[col::POSITION]).collect();
        assert_eq!(positions, [0.5, 1.0, 1.0 / 3.0, 2.0 / 3.0, 1.0, 1.0]);
        // `other` section → all-zero one-hot
        assert!(m.rows[5][col::SECTION_ONE_HOT..col::POSITION].iter().all(|&v| v == 0.0));
        let n = paper.sentence_count();
        for i in 0..n {
            for (k, delta) in [-1i64, -2, -3, 1, 2, 3].iter().enumerate() {
                let j = i as i64 + delta;
                let expected = if j < 0 || j >= n as i64 {
                    0.0
                } else {
                    crate::embedding::cosine(&emb.sentences[i], &emb.sentences[j as usize]).unwrap()
                };
                assert_eq!(m.rows[i][col::SIM_PREV + k], expected);
            }
        }
    }

    #[test]
    fn length_mismatch() {
        let paper = parse_paper("<paper><title>T</title><abstract><s>a</s></abstract></paper>").unwrap();
        let mut emb = PaperEmbeddings::compute(&paper, &HashedProvider::new(4).unwrap()).unwrap();
        emb.sentences.clear();
        let stats = CorpusStats::from_documents(Vec::<Vec<&String>>::new());
        assert!(matches!(extract_features(&paper, &emb, &stats), Err(FeatureError::LengthMismatch { expected: 1, found: 0 })));
    }

    #[test]
    fn clause_and_depth_proxies() {
        assert_eq!(sub_sentence_count("a; b, and c, but d, or e"), 5);
        assert_eq!(sub_sentence_count("in order, order matters"), 1);
        assert_eq!(sub_sentence_count("x, orange"), 1);
        let toks = crate::text::tokenize("the model which we train because it works when data that is");
        assert_eq!(parse_depth_proxy(&toks), 5);
        let many: Vec<String> = std::iter::repeat("that".to_string()).take(20).collect();
        assert_eq!(parse_depth_proxy(&many), 10);
    }

    #[test]
    fn stats_parse_and_serialize() {
        let stats = CorpusStats::parse("#docs=3\ncat\t2\ndog\t3\n").unwrap();
        assert_eq!(stats.doc_count, 3);
        assert_eq!(CorpusStats::parse(&stats.to_tsv()).unwrap(), stats);
        assert!(CorpusStats::parse("#docs=2\ncat\t3\n").is_err());
        assert!(CorpusStats::parse("#docs=0\n").is_err());
        assert!(CorpusStats::parse("cat\t1\n").is_err());
        assert!(CorpusStats::parse("#docs=2\ncat\t1\ncat\t1\n").is_err());
    }

    #[test]
    fn schema_names_are_stable() {
        let s = FeatureSchema::standard(3);
        assert_eq!(s.width(), 33);
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<FeatureSchema>(&json).unwrap(), s);
        assert_eq!(s.column_names()[30], "emb_0");
    }
}
