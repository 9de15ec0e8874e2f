//! End-to-end composition of the stages, shared by the command line and the
//! integration tests.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::document::{parse_paper, parse_slides, Paper, SlideText};
use crate::embedding::{EmbeddingProvider, ProviderConfig};
use crate::error::{Error, Result};
use crate::features::{extract_features, CorpusStats, FeatureMatrix, PaperEmbeddings};
use crate::lexicon::Lexicon;
use crate::metrics::{evaluate_corpus, rouge_all, CorpusScores, RougeTriple};
use crate::organize::{build_outline, Outline};
use crate::render::{layout_deck, LayoutConfig};
use crate::salience::{label_salience, predict, train, MlpModel, SalienceLabels, TrainConfig, TrainReport};
use crate::selection::{
    fallback_size, predict_size, select_exact, select_heuristic, PaperStats, Selection, SelectionProblem, SizeModel,
    DEFAULT_EXACT_CAP, DEFAULT_THETA,
};
use crate::text::tokenize;

pub const PAPER_SUFFIX: &str = ".paper.xml";
pub const SLIDES_SUFFIX: &str = ".slides.txt";
pub const DEFAULT_SIZE_FRACTION: f64 = 0.20;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub theta: f64,
    /// Explicit character budget; overrides the size model and the fraction.
    pub size: Option<usize>,
    pub size_fraction: f64,
    pub seed: u64,
    pub provider: ProviderConfig,
    /// Largest candidate count handed to the exact solver.
    pub exact_cap: usize,
    pub include_abstract: bool,
    pub layout: LayoutConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            theta: DEFAULT_THETA,
            size: None,
            size_fraction: DEFAULT_SIZE_FRACTION,
            seed: DEFAULT_SEED,
            provider: ProviderConfig::default(),
            exact_cap: DEFAULT_EXACT_CAP,
            include_abstract: true,
            layout: LayoutConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.size_fraction > 0.0 && self.size_fraction <= 1.0) {
            return Err(Error::Config(format!("size fraction must be in (0, 1], got {}", self.size_fraction)));
        }
        if !(-1.0..=1.0).contains(&self.theta) {
            return Err(Error::Config(format!("theta must be in [-1, 1], got {}", self.theta)));
        }
        if self.layout.max_second_level_per_slide == 0 {
            return Err(Error::Config("slides must hold at least one sentence".into()));
        }
        Ok(())
    }
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_owned(), source })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io { path: path.to_owned(), source })
}

pub fn load_paper(path: &Path) -> Result<Paper> {
    parse_paper(&read_text(path)?).map_err(|e| Error::from(e).in_file(path))
}

pub fn load_slides(path: &Path) -> Result<SlideText> {
    parse_slides(&read_text(path)?).map_err(|e| Error::from(e).in_file(path))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SizeSource {
    Explicit,
    Model,
    Fraction,
}

impl SizeSource {
    fn as_str(self) -> &'static str {
        match self {
            SizeSource::Explicit => "explicit",
            SizeSource::Model => "model",
            SizeSource::Fraction => "fraction",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Solver {
    Exact,
    Heuristic,
}

/// Explicit size, else the size model, else the fraction of the paper.
pub fn choose_size(paper: &Paper, size_model: Option<&SizeModel>, cfg: &RunConfig) -> (usize, SizeSource) {
    match (cfg.size, size_model) {
        (Some(size), _) => (size, SizeSource::Explicit),
        (None, Some(model)) => (predict_size(model, paper), SizeSource::Model),
        (None, None) => (fallback_size(paper, cfg.size_fraction), SizeSource::Fraction),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerateReport {
    pub sentences: usize,
    pub candidates: usize,
    pub size: usize,
    pub size_source: SizeSource,
    pub theta: f64,
    pub solver: Solver,
    pub selected: usize,
    pub objective: f64,
    pub total_length: usize,
    pub avg_similarity: f64,
    pub clusters: usize,
    pub slides: usize,
    pub warnings: Vec<String>,
}

impl GenerateReport {
    /// `key=value` lines; one `warning=` line per warning.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let solver = match self.solver {
            Solver::Exact => "exact",
            Solver::Heuristic => "heuristic",
        };
        let _ = writeln!(out, "sentences={}", self.sentences);
        let _ = writeln!(out, "candidates={}", self.candidates);
        let _ = writeln!(out, "size={}", self.size);
        let _ = writeln!(out, "size_source={}", self.size_source.as_str());
        let _ = writeln!(out, "theta={}", self.theta);
        let _ = writeln!(out, "solver={solver}");
        let _ = writeln!(out, "selected={}", self.selected);
        let _ = writeln!(out, "objective={}", self.objective);
        let _ = writeln!(out, "total_length={}", self.total_length);
        let _ = writeln!(out, "avg_similarity={}", self.avg_similarity);
        let _ = writeln!(out, "clusters={}", self.clusters);
        let _ = writeln!(out, "slides={}", self.slides);
        if self.selected == 0 {
            let _ = writeln!(out, "note=empty selection");
        }
        for w in &self.warnings {
            let _ = writeln!(out, "warning={w}");
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generated {
    pub deck: String,
    pub outline: Outline,
    /// Selection over global sentence indices.
    pub selection: Selection,
    pub report: GenerateReport,
}

/// Feature rows for every sentence of `paper`.
pub fn paper_features(
    paper: &Paper,
    provider: &dyn EmbeddingProvider,
    stats: &CorpusStats,
) -> Result<(FeatureMatrix, PaperEmbeddings)> {
    let embeddings = PaperEmbeddings::compute(paper, provider)?;
    let features = extract_features(paper, &embeddings, stats)?;
    Ok((features, embeddings))
}

/// Runs every stage on one paper and checks the deck against the
/// selection it came from.
pub fn generate(
    paper: &Paper,
    model: &MlpModel,
    size_model: Option<&SizeModel>,
    stats: &CorpusStats,
    provider: &dyn EmbeddingProvider,
    cfg: &RunConfig,
) -> Result<Generated> {
    cfg.validate()?;
    let (features, embeddings) = paper_features(paper, provider, stats)?;
    let scores = predict(model, &features)?;
    let (size, size_source) = choose_size(paper, size_model, cfg);

    let sentences = paper.sentence_stream();
    let first_candidate = if cfg.include_abstract { 0 } else { paper.abstract_sentences.len() };
    let candidates: Vec<usize> = (first_candidate..sentences.len()).collect();
    let problem = SelectionProblem::from_embeddings(
        candidates.iter().map(|&i| sentences[i].char_len()).collect(),
        candidates.iter().map(|&i| scores[i]).collect(),
        &candidates.iter().map(|&i| &embeddings.sentences[i]).collect::<Vec<_>>(),
        size,
        cfg.theta,
    )?;
    let (local, solver) = if problem.len() <= cfg.exact_cap {
        (select_exact(&problem, cfg.exact_cap)?, Solver::Exact)
    } else {
        (select_heuristic(&problem), Solver::Heuristic)
    };
    check_selection(&problem, &local)?;
    let selection = Selection { chosen: local.chosen.iter().map(|&k| candidates[k]).collect(), ..local };

    let lexicon = Lexicon::bundled();
    let (outline, warnings) = build_outline(paper, &selection.chosen, &embeddings.sentences, provider, &lexicon)?;
    let deck = layout_deck(&outline, paper, &cfg.layout);
    check_deck(paper, &selection, &outline, deck.sentences())?;

    let report = GenerateReport {
        sentences: sentences.len(),
        candidates: candidates.len(),
        size,
        size_source,
        theta: cfg.theta,
        solver,
        selected: selection.chosen.len(),
        objective: selection.objective,
        total_length: selection.total_length,
        avg_similarity: selection.avg_similarity,
        clusters: outline.clusters.len(),
        slides: deck.slides.len(),
        warnings,
    };
    Ok(Generated { deck: deck.to_text(), outline, selection, report })
}

fn check_selection(problem: &SelectionProblem, selection: &Selection) -> Result<()> {
    if !problem.is_feasible(&selection.chosen) {
        return Err(Error::Invariant(format!("selection {:?} is infeasible", selection.chosen)));
    }
    if selection.total_length > problem.size_budget() {
        return Err(Error::Invariant(format!(
            "selected length {} exceeds size {}",
            selection.total_length,
            problem.size_budget()
        )));
    }
    if selection.chosen.len() >= 2 && selection.avg_similarity > problem.theta() + 1e-9 {
        return Err(Error::Invariant(format!(
            "average similarity {} exceeds theta {}",
            selection.avg_similarity,
            problem.theta()
        )));
    }
    Ok(())
}

fn check_deck<'a>(
    paper: &Paper,
    selection: &Selection,
    outline: &Outline,
    deck_sentences: impl Iterator<Item = &'a str>,
) -> Result<()> {
    let mut in_outline: Vec<usize> = outline.sentence_order().collect();
    let sentences = paper.sentence_stream();
    let expected: Vec<&str> = in_outline.iter().map(|&i| sentences[i].text.as_str()).collect();
    if !deck_sentences.eq(expected.iter().copied()) {
        return Err(Error::Invariant("deck sentences differ from the outline".into()));
    }
    in_outline.sort_unstable();
    if in_outline != selection.chosen {
        return Err(Error::Invariant("outline does not cover the selection exactly".into()));
    }
    Ok(())
}

/// Salience label for every paper sentence against the reference slides.
pub fn label_pair(paper: &Paper, slides: &SlideText, provider: &dyn EmbeddingProvider) -> Result<SalienceLabels> {
    let texts: Vec<&str> = paper.sentence_stream().iter().map(|s| s.text.as_str()).collect();
    let slide_texts: Vec<&str> = slides.sentences.iter().map(String::as_str).collect();
    let paper_vecs = provider.embed(&texts)?;
    let slide_vecs = provider.embed(&slide_texts)?;
    Ok(label_salience(&paper_vecs, &slide_vecs)?)
}

/// `global_index<TAB>salience` rows with shortest round-trip formatting.
pub fn labels_tsv(labels: &SalienceLabels) -> String {
    labels.values.iter().enumerate().map(|(i, v)| format!("{i}\t{v:?}\n")).collect()
}

/// A `<stem>.paper.xml` / `<stem>.slides.txt` pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairPaths {
    pub stem: String,
    pub paper: PathBuf,
    pub slides: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PairListing {
    /// Sorted by stem.
    pub pairs: Vec<PairPaths>,
    /// Files with one of the two suffixes but no partner, sorted.
    pub unmatched: Vec<PathBuf>,
}

pub fn discover_pairs(dir: &Path) -> Result<PairListing> {
    let io = |source| Error::Io { path: dir.to_owned(), source };
    let mut papers: HashMap<String, PathBuf> = HashMap::new();
    let mut slides: HashMap<String, PathBuf> = HashMap::new();
    for entry in std::fs::read_dir(dir).map_err(io)? {
        let path = entry.map_err(io)?.path();
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else { continue };
        if let Some(stem) = name.strip_suffix(PAPER_SUFFIX) {
            papers.insert(stem.to_owned(), path.clone());
        } else if let Some(stem) = name.strip_suffix(SLIDES_SUFFIX) {
            slides.insert(stem.to_owned(), path.clone());
        }
    }
    let mut listing = PairListing::default();
    for (stem, paper) in &papers {
        match slides.remove(stem) {
            Some(s) => listing.pairs.push(PairPaths { stem: stem.clone(), paper: paper.clone(), slides: s }),
            None => listing.unmatched.push(paper.clone()),
        }
    }
    listing.unmatched.extend(slides.into_values());
    listing.pairs.sort_by(|a, b| a.stem.cmp(&b.stem));
    listing.unmatched.sort();
    Ok(listing)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedPair {
    pub stem: String,
    pub paper: Paper,
    pub slides: SlideText,
}

/// Parses every pair, setting aside the ones that fail.
pub fn load_pairs(pairs: &[PairPaths]) -> (Vec<LoadedPair>, Vec<Error>) {
    let mut loaded = Vec::new();
    let mut failed = Vec::new();
    for p in pairs {
        match load_paper(&p.paper).and_then(|paper| Ok((paper, load_slides(&p.slides)?))) {
            Ok((paper, slides)) => loaded.push(LoadedPair { stem: p.stem.clone(), paper, slides }),
            Err(e) => failed.push(e),
        }
    }
    (loaded, failed)
}

/// Splits off the last `round(fraction × n)` pairs, keeping at least one
/// pair for training.
pub fn split_holdout(pairs: Vec<LoadedPair>, fraction: f64) -> (Vec<LoadedPair>, Vec<LoadedPair>) {
    let mut train = pairs;
    let held = ((fraction * train.len() as f64).round() as usize).min(train.len().saturating_sub(1));
    let holdout = train.split_off(train.len() - held);
    (train, holdout)
}

pub fn corpus_stats(pairs: &[LoadedPair]) -> CorpusStats {
    CorpusStats::from_papers(pairs.iter().map(|p| &p.paper))
}

/// Features and labels for every pair, then SGD training.
pub fn train_salience(
    pairs: &[LoadedPair],
    provider: &dyn EmbeddingProvider,
    stats: &CorpusStats,
    cfg: &TrainConfig,
) -> Result<(MlpModel, TrainReport)> {
    let mut features = Vec::with_capacity(pairs.len());
    let mut labels = Vec::with_capacity(pairs.len());
    for p in pairs {
        let matrix = paper_features(&p.paper, provider, stats).map_err(|e| e.in_file(&p.stem))?.0;
        features.push(matrix);
        labels.push(label_pair(&p.paper, &p.slides, provider).map_err(|e| e.in_file(&p.stem))?);
    }
    Ok(train(&features, &labels, cfg)?)
}

/// Regression pairs: paper statistics against the reference slide length
/// in characters.
pub fn size_training_pairs(pairs: &[LoadedPair]) -> Vec<(PaperStats, f64)> {
    pairs
        .iter()
        .map(|p| {
            let chars: usize = p.slides.sentences.iter().map(|s| s.chars().count()).sum();
            (PaperStats::from_paper(&p.paper), chars as f64)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairScore {
    pub stem: String,
    pub scores: RougeTriple,
}

#[derive(Debug)]
pub struct Evaluation {
    pub per_pair: Vec<PairScore>,
    /// Pairs whose generation failed, with the pair stem as context.
    pub failed: Vec<Error>,
    /// `None` when no pair succeeded.
    pub means: Option<CorpusScores>,
}

/// Generates a deck for every pair and scores it against the pair's slides.
/// Pairs whose generation fails are set aside instead of aborting.
pub fn evaluate_pairs(
    pairs: &[LoadedPair],
    model: &MlpModel,
    size_model: Option<&SizeModel>,
    stats: &CorpusStats,
    provider: &dyn EmbeddingProvider,
    cfg: &RunConfig,
) -> Evaluation {
    let mut texts = Vec::new();
    let mut per_pair = Vec::new();
    let mut failed = Vec::new();
    for p in pairs {
        match generate(&p.paper, model, size_model, stats, provider, cfg) {
            Ok(g) => {
                let reference = p.slides.sentences.join("\n");
                let scores = rouge_all(&tokenize(&g.deck), &tokenize(&reference));
                per_pair.push(PairScore { stem: p.stem.clone(), scores });
                texts.push((g.deck, reference));
            }
            Err(e) => failed.push(e.in_file(&p.stem)),
        }
    }
    Evaluation { per_pair, failed, means: evaluate_corpus(&texts).ok() }
}
