//! Groups selected sentences into titled clusters and assigns graphics.
//!
//! Clustering works on the complete similarity graph over the selected
//! sentences. Edges lighter than a threshold `t` are removed and the
//! remaining connected components become clusters; `t` is chosen among the
//! distinct edge weights (plus `+∞`) so the component count lands as close
//! as possible to `round(N / 3)`. Raising `t` only removes edges, so the
//! count is monotone in `t` and the search is a binary search.

use std::collections::{HashMap, HashSet};

use crate::document::{Paper, Sentence};
use crate::embedding::{cosine_unchecked, Embedding, EmbeddingError, EmbeddingProvider};
use crate::lexicon::Lexicon;
use crate::text::title_case;

const FALLBACK_TITLE_TOKENS: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cluster {
    /// Global sentence indices, ascending.
    pub members: Vec<usize>,
    pub title: String,
    /// Graphic ids in first-mention order.
    pub graphics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Outline {
    pub clusters: Vec<Cluster>,
}

impl Outline {
    /// Selected sentences in outline order.
    pub fn sentence_order(&self) -> impl Iterator<Item = usize> + '_ {
        self.clusters.iter().flat_map(|c| c.members.iter().copied())
    }
}

/// Weighted complete graph on `n` nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityGraph {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdChoice {
    pub threshold: f64,
    pub components: usize,
    pub target: usize,
}

impl SimilarityGraph {
    pub fn new(n: usize, edges: Vec<(usize, usize, f64)>) -> Self {
        debug_assert!(edges.iter().all(|&(a, b, w)| a < n && b < n && !w.is_nan()));
        SimilarityGraph { n, edges }
    }

    pub fn from_vectors(vectors: &[&Embedding]) -> Self {
        let mut edges = Vec::new();
        for j in 0..vectors.len() {
            for i in 0..j {
                edges.push((i, j, cosine_unchecked(vectors[i].components(), vectors[j].components())));
            }
        }
        SimilarityGraph { n: vectors.len(), edges }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    /// Distinct edge weights ascending, then `+∞`.
    pub fn candidate_thresholds(&self) -> Vec<f64> {
        let mut weights: Vec<f64> = self.edges.iter().map(|e| e.2).collect();
        weights.sort_by(f64::total_cmp);
        weights.dedup();
        weights.push(f64::INFINITY);
        weights
    }

    /// Component labels after dropping edges lighter than `threshold`.
    fn labels(&self, threshold: f64) -> Vec<usize> {
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for &(a, b, w) in &self.edges {
            if w >= threshold {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
        (0..self.n).map(|x| find(&mut parent, x)).collect()
    }

    pub fn component_count(&self, threshold: f64) -> usize {
        let labels = self.labels(threshold);
        labels.iter().enumerate().filter(|&(i, &l)| i == l).count()
    }

    /// Node groups at `threshold`, each ascending, ordered by first node.
    pub fn components(&self, threshold: f64) -> Vec<Vec<usize>> {
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut slot: HashMap<usize, usize> = HashMap::new();
        for (node, root) in self.labels(threshold).into_iter().enumerate() {
            let g = *slot.entry(root).or_insert_with(|| {
                groups.push(Vec::new());
                groups.len() - 1
            });
            groups[g].push(node);
        }
        groups
    }

    /// Threshold whose component count is nearest `round(n / 3)`, ties going
    /// to the smaller threshold.
    pub fn choose_threshold(&self) -> ThresholdChoice {
        let target = (self.n as f64 / 3.0).round() as usize;
        let candidates = self.candidate_thresholds();
        let counts = |k: usize| self.component_count(candidates[k]);
        // First candidate index whose count reaches `at_least`.
        let lower_bound = |at_least: usize| {
            let (mut lo, mut hi) = (0, candidates.len());
            while lo < hi {
                let mid = (lo + hi) / 2;
                if counts(mid) >= at_least {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            lo
        };

        // `+∞` leaves n ≥ target components, so `above` is in range.
        let above = lower_bound(target);
        let mut best = ThresholdChoice { threshold: candidates[above], components: counts(above), target };
        if above > 0 {
            let below_count = counts(above - 1);
            let below = lower_bound(below_count);
            if target - below_count <= best.components - target {
                best = ThresholdChoice { threshold: candidates[below], components: below_count, target };
            }
        }
        best
    }
}

/// Clusters the `selected` sentences. Returns global indices, each cluster
/// ascending and clusters ordered by their first sentence.
pub fn cluster_sentences(selected: &[usize], vectors: &[Embedding]) -> Vec<Vec<usize>> {
    let mut selected = selected.to_vec();
    selected.sort_unstable();
    let picked: Vec<&Embedding> = selected.iter().map(|&i| &vectors[i]).collect();
    let graph = SimilarityGraph::from_vectors(&picked);
    let choice = graph.choose_threshold();
    graph.components(choice.threshold).into_iter().map(|group| group.into_iter().map(|k| selected[k]).collect()).collect()
}

/// Picks the noun phrase with the highest mean cosine similarity to the
/// cluster's sentences, rendered in title case.
///
/// Earlier phrases win ties. Without any noun phrase the title is the first
/// five tokens of the first sentence.
pub fn title_cluster(
    members: &[&Sentence],
    member_vecs: &[&Embedding],
    provider: &dyn EmbeddingProvider,
    lexicon: &Lexicon,
) -> Result<String, EmbeddingError> {
    let mut best: Option<(&[String], f64)> = None;
    let mut seen: HashMap<String, f64> = HashMap::new();
    for sentence in members {
        for phrase in lexicon.noun_phrases(&sentence.tokens) {
            let text = phrase.join(" ");
            let score = match seen.get(&text) {
                Some(&s) => s,
                None => {
                    let v = provider.embed_one(&text)?;
                    let total: f64 = member_vecs.iter().map(|m| cosine_unchecked(v.components(), m.components())).sum();
                    let s = total / member_vecs.len() as f64;
                    seen.insert(text, s);
                    s
                }
            };
            if best.map_or(true, |(_, b)| score > b) {
                best = Some((phrase, score));
            }
        }
    }
    if let Some((phrase, _)) = best {
        return Ok(title_case(phrase));
    }
    let Some(first) = members.first() else {
        return Ok(String::new());
    };
    if first.tokens.is_empty() {
        return Ok(first.text.split_whitespace().take(FALLBACK_TITLE_TOKENS).collect::<Vec<_>>().join(" "));
    }
    let n = first.tokens.len().min(FALLBACK_TITLE_TOKENS);
    Ok(title_case(&first.tokens[..n]))
}

/// Gives each cluster the resolvable graphics its sentences reference. A
/// graphic belongs to the first cluster that mentions it. Dangling
/// references are reported, one warning per mention.
pub fn attach_graphics(mut outline: Outline, paper: &Paper) -> (Outline, Vec<String>) {
    let sentences = paper.sentence_stream();
    let mut owned: HashSet<String> = HashSet::new();
    let mut warnings = Vec::new();
    for cluster in &mut outline.clusters {
        cluster.graphics.clear();
        for &idx in &cluster.members {
            for mark in sentences[idx].ref_marks.iter().filter(|m| m.kind.is_graphic()) {
                if !mark.resolved {
                    warnings
                        .push(format!("dangling {:?} reference '{}' in sentence {idx}", mark.kind, mark.target).to_lowercase());
                } else if owned.insert(mark.target.clone()) {
                    cluster.graphics.push(mark.target.clone());
                }
            }
        }
    }
    (outline, warnings)
}

/// Clusters, titles and decorates a selection.
pub fn build_outline(
    paper: &Paper,
    selected: &[usize],
    vectors: &[Embedding],
    provider: &dyn EmbeddingProvider,
    lexicon: &Lexicon,
) -> Result<(Outline, Vec<String>), EmbeddingError> {
    if selected.is_empty() {
        return Ok((Outline::default(), Vec::new()));
    }
    let sentences = paper.sentence_stream();
    let mut clusters = Vec::new();
    for members in cluster_sentences(selected, vectors) {
        let member_sentences: Vec<&Sentence> = members.iter().map(|&i| sentences[i]).collect();
        let member_vecs: Vec<&Embedding> = members.iter().map(|&i| &vectors[i]).collect();
        let title = title_cluster(&member_sentences, &member_vecs, provider, lexicon)?;
        clusters.push(Cluster { members, title, graphics: Vec::new() });
    }
    Ok(attach_graphics(Outline { clusters }, paper))
}
