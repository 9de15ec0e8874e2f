//! Sentence vectors and cosine similarity.
//!
//! Two providers exist. [`HashedProvider`] is a deterministic bag of hashed
//! token unigrams and character trigrams; it needs no model and keeps every
//! stage runnable offline. [`VectorCache`] serves precomputed vectors from a
//! TSV table keyed by the FNV-1a-64 hash of the raw text.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::text::tokenize;

pub const DEFAULT_DIM: usize = 256;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("vector cache has no entry for key {key} (text: {text:?})")]
    CacheMiss { key: String, text: String },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("vector cache line {line}: {message}")]
    CacheFormat { line: usize, message: String },
    #[error("invalid provider config: {0}")]
    InvalidConfig(String),
    #[error("reading {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

/// A sentence vector. Unit norm, or all zeros for text with no features.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding(Vec<f64>);

impl Embedding {
    pub fn zeros(dim: usize) -> Self {
        Embedding(vec![0.0; dim])
    }

    /// Scales `components` to unit length. A zero vector stays zero.
    pub fn normalized(mut components: Vec<f64>) -> Self {
        let norm = components.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm > 0.0 {
            for c in &mut components {
                *c /= norm;
            }
        }
        Embedding(components)
    }

    /// Wraps components without normalizing.
    pub fn from_raw(components: Vec<f64>) -> Self {
        Embedding(components)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0.0)
    }

    /// Renormalized mean of `vectors`; zero when the slice is empty or the
    /// mean vanishes.
    pub fn centroid<'a>(vectors: impl IntoIterator<Item = &'a Embedding>, dim: usize) -> Embedding {
        let mut sum = vec![0.0; dim];
        let mut n = 0usize;
        for v in vectors {
            for (s, c) in sum.iter_mut().zip(&v.0) {
                *s += c;
            }
            n += 1;
        }
        if n == 0 {
            return Embedding::zeros(dim);
        }
        for s in &mut sum {
            *s /= n as f64;
        }
        Embedding::normalized(sum)
    }
}

/// Cosine similarity, clamped to [-1, 1]. Zero when either vector is zero.
pub fn cosine(u: &Embedding, v: &Embedding) -> Result<f64, EmbeddingError> {
    if u.dim() != v.dim() {
        return Err(EmbeddingError::DimensionMismatch { expected: u.dim(), found: v.dim() });
    }
    Ok(cosine_unchecked(&u.0, &v.0))
}

pub(crate) fn cosine_unchecked(u: &[f64], v: &[f64]) -> f64 {
    let mut dot = 0.0;
    let mut uu = 0.0;
    let mut vv = 0.0;
    for (a, b) in u.iter().zip(v) {
        dot += a * b;
        uu += a * a;
        vv += b * b;
    }
    if uu == 0.0 || vv == 0.0 {
        return 0.0;
    }
    (dot / (uu * vv).sqrt()).clamp(-1.0, 1.0)
}

/// FNV-1a, 64-bit.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    bytes.iter().fold(OFFSET, |h, &b| (h ^ u64::from(b)).wrapping_mul(PRIME))
}

/// Cache key for `text`: lowercase hex of its FNV-1a-64 hash.
pub fn cache_key(text: &str) -> String {
    format!("{:016x}", fnv1a64(text.as_bytes()))
}

/// Hashed bag of token unigrams and character trigrams of the
/// space-joined token string, L2-normalized.
pub fn hashed_fallback_embed(text: &str, dim: usize) -> Embedding {
    assert!(dim >= 2, "embedding dim must be at least 2");
    let tokens = tokenize(text);
    let mut counts = vec![0.0; dim];
    let mut bump = |feature: &str| {
        let slot = (fnv1a64(feature.as_bytes()) % dim as u64) as usize;
        counts[slot] += 1.0;
    };
    for token in &tokens {
        bump(token);
    }
    let joined: Vec<char> = tokens.join(" ").chars().collect();
    let mut buf = String::with_capacity(12);
    for window in joined.windows(3) {
        buf.clear();
        buf.extend(window);
        bump(&buf);
    }
    Embedding::normalized(counts)
}

/// Anything that maps texts to sentence vectors. Implementations are
/// read-only after construction.
pub trait EmbeddingProvider: Send + Sync {
    fn dim(&self) -> usize;

    fn embed_one(&self, text: &str) -> Result<Embedding, EmbeddingError>;

    fn embed(&self, texts: &[&str]) -> Result<Vec<Embedding>, EmbeddingError> {
        texts.iter().map(|t| self.embed_one(t)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashedProvider {
    dim: usize,
}

impl HashedProvider {
    pub fn new(dim: usize) -> Result<Self, EmbeddingError> {
        if dim < 2 {
            return Err(EmbeddingError::InvalidConfig(format!("dim must be >= 2, got {dim}")));
        }
        Ok(HashedProvider { dim })
    }
}

impl EmbeddingProvider for HashedProvider {
    fn dim(&self) -> usize {
        self.dim
    }

    fn embed_one(&self, text: &str) -> Result<Embedding, EmbeddingError> {
        Ok(hashed_fallback_embed(text, self.dim))
    }
}

/// Precomputed text vectors.
///
/// File format: a `#dim=D` header, then rows of `key<TAB>c1<TAB>...<TAB>cD`
/// where `key` is [`cache_key`] of the raw text. Rows are normalized on load.
#[derive(Debug, Clone)]
pub struct VectorCache {
    dim: usize,
    rows: HashMap<u64, Embedding>,
}

impl VectorCache {
    pub fn parse(text: &str) -> Result<Self, EmbeddingError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(EmbeddingError::CacheFormat { line: 1, message: "missing #dim header".into() })?;
        let dim: usize = header
            .trim()
            .strip_prefix("#dim=")
            .and_then(|d| d.parse().ok())
            .ok_or_else(|| EmbeddingError::CacheFormat { line: 1, message: format!("bad header {header:?}") })?;
        if dim < 2 {
            return Err(EmbeddingError::CacheFormat { line: 1, message: format!("dim must be >= 2, got {dim}") });
        }

        let mut rows = HashMap::new();
        for (i, line) in lines {
            let line_no = i + 1;
            let bad = |message: String| EmbeddingError::CacheFormat { line: line_no, message };
            let mut fields = line.split('\t');
            let key = fields.next().unwrap_or("");
            let valid_key = !key.is_empty() && key.len() <= 16 && key.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f'));
            if !valid_key {
                return Err(bad(format!("key {key:?} is not lowercase hex")));
            }
            let key = u64::from_str_radix(key, 16).map_err(|e| bad(e.to_string()))?;
            let components = fields
                .map(|f| match f.trim().parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    _ => Err(bad(format!("bad component {f:?}"))),
                })
                .collect::<Result<Vec<_>, _>>()?;
            if components.len() != dim {
                return Err(EmbeddingError::DimensionMismatch { expected: dim, found: components.len() });
            }
            if rows.insert(key, Embedding::normalized(components)).is_some() {
                return Err(bad(format!("duplicate key {key:016x}")));
            }
        }
        Ok(VectorCache { dim, rows })
    }

    pub fn load(path: &Path) -> Result<Self, EmbeddingError> {
        let text = std::fs::read_to_string(path).map_err(|source| EmbeddingError::Io { path: path.to_owned(), source })?;
        Self::parse(&text)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

impl EmbeddingProvider for VectorCache {
    fn dim(&self) -> usize {
        self.dim
    }

    fn embed_one(&self, text: &str) -> Result<Embedding, EmbeddingError> {
        let key = fnv1a64(text.as_bytes());
        self.rows
            .get(&key)
            .cloned()
            .ok_or_else(|| EmbeddingError::CacheMiss { key: format!("{key:016x}"), text: text.to_owned() })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProviderKind {
    HashedFallback,
    VectorCache,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProviderConfig {
    pub kind: ProviderKind,
    pub dim: usize,
    pub cache_path: Option<PathBuf>,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        ProviderConfig { kind: ProviderKind::HashedFallback, dim: DEFAULT_DIM, cache_path: None }
    }
}

impl ProviderConfig {
    pub fn hashed(dim: usize) -> Self {
        ProviderConfig { kind: ProviderKind::HashedFallback, dim, cache_path: None }
    }

    pub fn build(&self) -> Result<Box<dyn EmbeddingProvider>, EmbeddingError> {
        if self.dim < 2 {
            return Err(EmbeddingError::InvalidConfig(format!("dim must be >= 2, got {}", self.dim)));
        }
        match self.kind {
            ProviderKind::HashedFallback => Ok(Box::new(HashedProvider::new(self.dim)?)),
            ProviderKind::VectorCache => {
                let path = self
                    .cache_path
                    .as_deref()
                    .ok_or_else(|| EmbeddingError::InvalidConfig("vector cache provider requires a cache path".into()))?;
                let cache = VectorCache::load(path)?;
                if cache.dim() != self.dim {
                    return Err(EmbeddingError::DimensionMismatch { expected: self.dim, found: cache.dim() });
                }
                Ok(Box::new(cache))
            }
        }
    }
}
