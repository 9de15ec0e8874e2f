use std::fs;
use std::path::{Path, PathBuf};

use deckgen::document::{parse_paper, parse_slides};
use deckgen::embedding::VectorCache;
use deckgen::features::CorpusStats;
use deckgen::salience::MlpModel;
use deckgen::selection::SizeModel;

fn seeds(target: &str) -> Vec<(PathBuf, String)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut files: Vec<PathBuf> = fs::read_dir(&dir).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    assert!(!files.is_empty(), "no seeds in {}", dir.display());
    files.into_iter().map(|p| (p.clone(), fs::read_to_string(&p).unwrap())).collect()
}

fn accepted(target: &str, parse: impl Fn(&str) -> bool) -> Vec<String> {
    seeds(target)
        .into_iter()
        .filter(|(_, text)| parse(text))
        .map(|(p, _)| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect()
}

#[test]
fn paper_seeds() {
    assert_eq!(accepted("parse_paper", |t| parse_paper(t).is_ok()), ["fixture.xml", "pair.xml", "refs.xml"]);
}

#[test]
fn slide_seeds() {
    assert_eq!(accepted("parse_slides", |t| parse_slides(t).is_ok()), ["mixed.txt", "pair.txt"]);
}

#[test]
fn vector_cache_seeds() {
    assert_eq!(accepted("vector_cache", |t| VectorCache::parse(t).is_ok()), ["small.tsv"]);
}

#[test]
fn corpus_stats_seeds() {
    assert_eq!(accepted("corpus_stats", |t| CorpusStats::parse(t).is_ok()), ["fixture.tsv", "small.tsv"]);
}

#[test]
fn mlp_model_seeds() {
    assert_eq!(accepted("mlp_model", |t| MlpModel::from_json(t).is_ok()), ["tiny.json"]);
}

#[test]
fn size_model_seeds() {
    assert_eq!(accepted("size_model", |t| SizeModel::from_json(t).is_ok()), ["fixture.json"]);
}
