//! Two-level bullet deck output.
//!
//! ```text
//! # Paper Title
//! ---
//! ## First Cluster Title
//! - **First Cluster Title**
//!   - A selected sentence.
//!   - [FIGURE fig1: Caption text]
//! - **Second Cluster Title**
//!   - Another sentence.
//! ```
//!
//! Clusters become first-level bullets, their sentences second-level
//! bullets. Clusters are packed onto slides in order and never split, unless
//! one alone holds more sentences than a slide allows; it then continues on
//! following slides with a `(cont.)` suffix.

use crate::document::Paper;
use crate::organize::Outline;

const CONTINUED: &str = " (cont.)";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayoutConfig {
    /// Sentence bullets per slide; at least 1.
    pub max_second_level_per_slide: usize,
    pub include_title_slide: bool,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        LayoutConfig { max_second_level_per_slide: 8, include_title_slide: true }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Bullet {
    Sentence(String),
    Graphic(String),
}

/// A first-level bullet with its nested bullets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub title: String,
    pub bullets: Vec<Bullet>,
}

impl Block {
    fn sentence_count(&self) -> usize {
        self.bullets.iter().filter(|b| matches!(b, Bullet::Sentence(_))).count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Slide {
    Title(String),
    Content(Vec<Block>),
}

impl Slide {
    pub fn sentence_count(&self) -> usize {
        match self {
            Slide::Title(_) => 0,
            Slide::Content(blocks) => blocks.iter().map(Block::sentence_count).sum(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Deck {
    pub slides: Vec<Slide>,
}

impl Deck {
    /// Second-level sentence bullets in deck order.
    pub fn sentences(&self) -> impl Iterator<Item = &str> {
        self.slides
            .iter()
            .flat_map(|s| match s {
                Slide::Title(_) => [].iter(),
                Slide::Content(blocks) => blocks.iter(),
            })
            .flat_map(|b| b.bullets.iter())
            .filter_map(|b| match b {
                Bullet::Sentence(t) => Some(t.as_str()),
                Bullet::Graphic(_) => None,
            })
    }

    pub fn to_text(&self) -> String {
        let mut rendered = Vec::with_capacity(self.slides.len());
        for slide in &self.slides {
            let mut s = String::new();
            match slide {
                Slide::Title(title) => s.push_str(&format!("# {title}\n")),
                Slide::Content(blocks) => {
                    let heading = blocks.first().map_or("", |b| b.title.as_str());
                    s.push_str(&format!("## {heading}\n"));
                    for block in blocks {
                        s.push_str(&format!("- **{}**\n", block.title));
                        for bullet in &block.bullets {
                            let (Bullet::Sentence(t) | Bullet::Graphic(t)) = bullet;
                            s.push_str(&format!("  - {t}\n"));
                        }
                    }
                }
            }
            rendered.push(s);
        }
        rendered.join("---\n")
    }
}

fn graphic_placeholder(paper: &Paper, id: &str) -> Option<String> {
    let g = paper.graphic(id)?;
    Some(if g.caption.is_empty() { format!("[{} {}]", g.kind, g.id) } else { format!("[{} {}: {}]", g.kind, g.id, g.caption) })
}

/// Packs the outline into slides.
pub fn layout_deck(outline: &Outline, paper: &Paper, cfg: &LayoutConfig) -> Deck {
    let budget = cfg.max_second_level_per_slide.max(1);
    let sentences = paper.sentence_stream();
    let mut slides = Vec::new();
    if cfg.include_title_slide {
        slides.push(Slide::Title(paper.title.clone()));
    }

    let mut current: Vec<Block> = Vec::new();
    let mut used = 0;
    for cluster in &outline.clusters {
        let texts: Vec<Bullet> = cluster.members.iter().map(|&i| Bullet::Sentence(sentences[i].text.clone())).collect();
        let graphics: Vec<Bullet> =
            cluster.graphics.iter().filter_map(|id| graphic_placeholder(paper, id)).map(Bullet::Graphic).collect();
        let k = texts.len();

        if used + k > budget && !current.is_empty() {
            slides.push(Slide::Content(std::mem::take(&mut current)));
            used = 0;
        }
        if k <= budget {
            let mut bullets = texts;
            bullets.extend(graphics);
            current.push(Block { title: cluster.title.clone(), bullets });
            used += k;
            continue;
        }

        let chunks: Vec<&[Bullet]> = texts.chunks(budget).collect();
        let last = chunks.len() - 1;
        for (n, chunk) in chunks.into_iter().enumerate() {
            let title = if n == 0 { cluster.title.clone() } else { format!("{}{CONTINUED}", cluster.title) };
            let mut bullets = chunk.to_vec();
            if n == last {
                bullets.extend(graphics.iter().cloned());
                used = chunk.len();
                current.push(Block { title, bullets });
            } else {
                slides.push(Slide::Content(vec![Block { title, bullets }]));
            }
        }
    }
    if !current.is_empty() {
        slides.push(Slide::Content(current));
    }
    Deck { slides }
}

/// Deck text: slides separated by `---` lines, LF endings, trailing newline.
pub fn emit_deck(outline: &Outline, paper: &Paper, cfg: &LayoutConfig) -> String {
    layout_deck(outline, paper, cfg).to_text()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::document::parse_paper;
    use crate::organize::Cluster;

    fn paper(n: usize) -> Paper {
        let body: String = (0..n).map(|i| format!("<s>Sentence {i}.</s>")).collect();
        let xml = format!(
            r#"<paper><title>T</title><abstract>{body}</abstract>
            <graphic id="fig1" kind="figure" caption="Flow"/><graphic id="eq1" kind="equation" caption=""/></paper>"#
        );
        parse_paper(&xml).unwrap()
    }

    fn cluster(members: std::ops::Range<usize>, title: &str) -> Cluster {
        Cluster { members: members.collect(), title: title.into(), graphics: vec![] }
    }

    #[test]
    fn empty_outline_is_title_only() {
        let p = paper(1);
        assert_eq!(emit_deck(&Outline::default(), &p, &LayoutConfig::default()), "# T\n");
    }

    #[test]
    fn single_cluster() {
        let p = paper(3);
        let mut c = cluster(0..3, "Results");
        c.graphics = vec!["fig1".into(), "eq1".into()];
        let text = emit_deck(&Outline { clusters: vec![c] }, &p, &LayoutConfig::default());
        assert_eq!(
            text,
            "# T\n---\n## Results\n- **Results**\n  - Sentence 0.\n  - Sentence 1.\n  - Sentence 2.\n  - [FIGURE fig1: Flow]\n  - [EQUATION eq1]\n"
        );
    }

    #[test]
    fn packing_breaks_before_overflow() {
        let p = paper(11);
        let outline = Outline { clusters: vec![cluster(0..5, "A"), cluster(5..9, "B"), cluster(9..11, "C")] };
        let deck = layout_deck(&outline, &p, &LayoutConfig::default());
        let titles: Vec<Vec<&str>> = deck
            .slides
            .iter()
            .map(|s| match s {
                Slide::Title(_) => vec![],
                Slide::Content(b) => b.iter().map(|b| b.title.as_str()).collect(),
            })
            .collect();
        assert_eq!(titles, vec![vec![], vec!["A"], vec!["B", "C"]]);
    }

    #[test]
    fn oversized_cluster_continues() {
        let p = paper(12);
        let outline = Outline { clusters: vec![cluster(0..1, "Lead"), cluster(1..11, "Big"), cluster(11..12, "Tail")] };
        let cfg = LayoutConfig { max_second_level_per_slide: 4, include_title_slide: false };
        let deck = layout_deck(&outline, &p, &cfg);
        let counts: Vec<usize> = deck.slides.iter().map(Slide::sentence_count).collect();
        assert_eq!(counts, [1, 4, 4, 3]);
        let text = deck.to_text();
        assert!(text.starts_with("## Lead\n"));
        assert_eq!(text.matches("- **Big (cont.)**").count(), 2);
        let order: Vec<String> = (0..12).map(|i| format!("Sentence {i}.")).collect();
        assert!(deck.sentences().eq(order.iter().map(String::as_str)));
    }
}
