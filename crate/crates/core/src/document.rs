//! In-memory paper and slide documents, and the parsers that build them.
//!
//! The paper XML contract is deliberately small:
//!
//! ```xml
//! <paper>
//!   <title>...</title>
//!   <abstract><s>...</s></abstract>
//!   <section name="Intro" kind="introduction">
//!     <s>See <ref type="figure" target="fig1"/>.</s>
//!   </section>
//!   <graphic id="fig1" kind="figure" caption="..."/>
//! </paper>
//! ```
//!
//! Each `<s>` is exactly one sentence; the parser never re-splits. A `<ref>`
//! is rendered into the sentence text as `[target]`.

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

use crate::text::{char_len, normalize_whitespace, tokenize};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DocumentError {
    #[error("malformed XML at {line}:{column}: {message}")]
    MalformedXml { line: u32, column: u32, message: String },
    #[error("schema violation at line {line}: {message}")]
    SchemaViolation { line: u32, message: String },
    #[error("slides text contains no usable lines")]
    EmptySlides,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SectionKind {
    Abstract,
    Introduction,
    Background,
    Model,
    Results,
    Conclusion,
    Acknowledgement,
    Other,
}

impl SectionKind {
    /// The seven kinds that own a one-hot slot, in slot order.
    pub const ONE_HOT: [SectionKind; 7] = [
        SectionKind::Abstract,
        SectionKind::Introduction,
        SectionKind::Background,
        SectionKind::Model,
        SectionKind::Results,
        SectionKind::Conclusion,
        SectionKind::Acknowledgement,
    ];

    /// Maps a `kind` attribute value. Absent or unknown values become `Other`.
    pub fn from_attr(value: Option<&str>) -> Self {
        match value.map(|v| v.trim().to_ascii_lowercase()).as_deref() {
            Some("abstract") => SectionKind::Abstract,
            Some("introduction") => SectionKind::Introduction,
            Some("background") => SectionKind::Background,
            Some("model") => SectionKind::Model,
            Some("results") => SectionKind::Results,
            Some("conclusion") => SectionKind::Conclusion,
            Some("acknowledgement") => SectionKind::Acknowledgement,
            _ => SectionKind::Other,
        }
    }

    pub fn one_hot_slot(self) -> Option<usize> {
        Self::ONE_HOT.iter().position(|&k| k == self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RefKind {
    Literature,
    Table,
    Figure,
    Equation,
}

impl RefKind {
    fn parse(value: &str) -> Option<Self> {
        match value {
            "literature" => Some(RefKind::Literature),
            "table" => Some(RefKind::Table),
            "figure" => Some(RefKind::Figure),
            "equation" => Some(RefKind::Equation),
            _ => None,
        }
    }

    pub fn is_graphic(self) -> bool {
        self != RefKind::Literature
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefMark {
    pub kind: RefKind,
    pub target: String,
    /// True when `target` names a graphic in the same paper. Literature
    /// references never resolve.
    pub resolved: bool,
}

impl RefMark {
    pub fn is_dangling(&self) -> bool {
        self.kind.is_graphic() && !self.resolved
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GraphicKind {
    Table,
    Figure,
    Equation,
}

impl GraphicKind {
    fn parse(value: &str) -> Option<Self> {
        match value {
            "table" => Some(GraphicKind::Table),
            "figure" => Some(GraphicKind::Figure),
            "equation" => Some(GraphicKind::Equation),
            _ => None,
        }
    }
}

impl fmt::Display for GraphicKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GraphicKind::Table => "TABLE",
            GraphicKind::Figure => "FIGURE",
            GraphicKind::Equation => "EQUATION",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphicElement {
    pub id: String,
    pub kind: GraphicKind,
    pub caption: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sentence {
    pub global_index: usize,
    /// `None` for abstract sentences.
    pub section_index: Option<usize>,
    /// 1-based.
    pub position_in_section: usize,
    pub text: String,
    pub tokens: Vec<String>,
    pub ref_marks: Vec<RefMark>,
}

impl Sentence {
    pub fn char_len(&self) -> usize {
        char_len(&self.text)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub name: String,
    pub kind: SectionKind,
    pub sentences: Vec<Sentence>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Paper {
    pub title: String,
    pub abstract_sentences: Vec<Sentence>,
    pub sections: Vec<Section>,
    pub graphics: Vec<GraphicElement>,
}

impl Paper {
    /// Abstract sentences first, then section sentences in document order.
    pub fn sentence_stream(&self) -> Vec<&Sentence> {
        self.abstract_sentences.iter().chain(self.sections.iter().flat_map(|s| s.sentences.iter())).collect()
    }

    pub fn sentence_count(&self) -> usize {
        self.abstract_sentences.len() + self.sections.iter().map(|s| s.sentences.len()).sum::<usize>()
    }

    /// Sum of sentence lengths in characters.
    pub fn total_chars(&self) -> usize {
        self.sentence_stream().iter().map(|s| s.char_len()).sum()
    }

    pub fn graphic(&self, id: &str) -> Option<&GraphicElement> {
        self.graphics.iter().find(|g| g.id == id)
    }

    pub fn section_kind_of(&self, sentence: &Sentence) -> SectionKind {
        match sentence.section_index {
            None => SectionKind::Abstract,
            Some(i) => self.sections[i].kind,
        }
    }

    /// Number of sentences in the block (abstract or section) holding `sentence`.
    pub fn block_len_of(&self, sentence: &Sentence) -> usize {
        match sentence.section_index {
            None => self.abstract_sentences.len(),
            Some(i) => self.sections[i].sentences.len(),
        }
    }

    pub fn dangling_refs(&self) -> impl Iterator<Item = (&Sentence, &RefMark)> {
        self.sentence_stream().into_iter().flat_map(|s| s.ref_marks.iter().map(move |r| (s, r))).filter(|(_, r)| r.is_dangling())
    }
}

/// Reference presentation (or insight) text, one sentence per entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlideText {
    pub sentences: Vec<String>,
}

/// Parses slide text with one sentence per line. Lines without any
/// alphanumeric character are dropped; the rest are whitespace-normalized.
pub fn parse_slides(text: &str) -> Result<SlideText, DocumentError> {
    let sentences: Vec<String> =
        text.lines().filter(|line| line.chars().any(char::is_alphanumeric)).map(normalize_whitespace).collect();
    if sentences.is_empty() {
        return Err(DocumentError::EmptySlides);
    }
    Ok(SlideText { sentences })
}

pub fn parse_paper(xml_text: &str) -> Result<Paper, DocumentError> {
    let doc = roxmltree::Document::parse(xml_text).map_err(|e| {
        let pos = e.pos();
        DocumentError::MalformedXml { line: pos.row, column: pos.col, message: e.to_string() }
    })?;
    PaperBuilder::new(&doc).build()
}

struct PaperBuilder<'a, 'input> {
    doc: &'a roxmltree::Document<'input>,
    next_index: usize,
}

impl<'a, 'input> PaperBuilder<'a, 'input> {
    fn new(doc: &'a roxmltree::Document<'input>) -> Self {
        PaperBuilder { doc, next_index: 0 }
    }

    fn violation(&self, node: roxmltree::Node, message: impl Into<String>) -> DocumentError {
        let line = self.doc.text_pos_at(node.range().start).row;
        DocumentError::SchemaViolation { line, message: message.into() }
    }

    fn build(mut self) -> Result<Paper, DocumentError> {
        let root = self.doc.root_element();
        if root.tag_name().name() != "paper" {
            return Err(self.violation(root, format!("root element must be <paper>, found <{}>", root.tag_name().name())));
        }

        let mut title = None;
        let mut abstract_node = None;
        let mut section_nodes = Vec::new();
        let mut graphics: Vec<GraphicElement> = Vec::new();
        let mut graphic_ids = HashSet::new();

        for child in root.children() {
            if child.is_text() {
                self.reject_text(child, "<paper>")?;
                continue;
            }
            if !child.is_element() {
                continue;
            }
            match child.tag_name().name() {
                "title" => {
                    if title.is_some() {
                        return Err(self.violation(child, "duplicate <title>"));
                    }
                    title = Some(self.plain_text(child)?);
                }
                "abstract" => {
                    if abstract_node.is_some() {
                        return Err(self.violation(child, "duplicate <abstract>"));
                    }
                    abstract_node = Some(child);
                }
                "section" => section_nodes.push(child),
                "graphic" => {
                    let graphic = self.graphic(child)?;
                    if !graphic_ids.insert(graphic.id.clone()) {
                        return Err(self.violation(child, format!("duplicate graphic id '{}'", graphic.id)));
                    }
                    graphics.push(graphic);
                }
                "s" => return Err(self.violation(child, "<s> outside a section or abstract")),
                other => return Err(self.violation(child, format!("unexpected element <{other}> in <paper>"))),
            }
        }

        let title = title.ok_or_else(|| self.violation(root, "missing <title>"))?;

        let abstract_sentences = match abstract_node {
            Some(node) => self.sentences(node, None)?,
            None => Vec::new(),
        };
        let mut sections = Vec::with_capacity(section_nodes.len());
        for (i, node) in section_nodes.into_iter().enumerate() {
            let name = normalize_whitespace(node.attribute("name").unwrap_or(""));
            let kind = SectionKind::from_attr(node.attribute("kind"));
            let sentences = self.sentences(node, Some(i))?;
            sections.push(Section { name, kind, sentences });
        }

        let mut paper = Paper { title, abstract_sentences, sections, graphics };
        resolve_refs(&mut paper, &graphic_ids);
        Ok(paper)
    }

    fn reject_text(&self, node: roxmltree::Node, parent: &str) -> Result<(), DocumentError> {
        match node.text() {
            Some(t) if !t.trim().is_empty() => Err(self.violation(node, format!("unexpected text in {parent}"))),
            _ => Ok(()),
        }
    }

    fn plain_text(&self, node: roxmltree::Node) -> Result<String, DocumentError> {
        let mut raw = String::new();
        for child in node.children() {
            if child.is_element() {
                return Err(self.violation(
                    child,
                    format!("unexpected element <{}> in <{}>", child.tag_name().name(), node.tag_name().name()),
                ));
            }
            if let Some(t) = child.text() {
                raw.push_str(t);
            }
        }
        Ok(normalize_whitespace(&raw))
    }

    fn graphic(&self, node: roxmltree::Node) -> Result<GraphicElement, DocumentError> {
        let id = node.attribute("id").map(str::trim).unwrap_or("");
        if id.is_empty() {
            return Err(self.violation(node, "<graphic> missing id"));
        }
        let kind_attr = node.attribute("kind").unwrap_or("");
        let kind = GraphicKind::parse(kind_attr)
            .ok_or_else(|| self.violation(node, format!("<graphic> kind '{kind_attr}' is not table, figure or equation")))?;
        if let Some(child) = node.children().find(|c| c.is_element()) {
            return Err(self.violation(child, "<graphic> must be empty"));
        }
        let caption = normalize_whitespace(node.attribute("caption").unwrap_or(""));
        Ok(GraphicElement { id: id.to_owned(), kind, caption })
    }

    fn sentences(&mut self, block: roxmltree::Node, section_index: Option<usize>) -> Result<Vec<Sentence>, DocumentError> {
        let parent = format!("<{}>", block.tag_name().name());
        let mut out = Vec::new();
        for child in block.children() {
            if child.is_text() {
                self.reject_text(child, &parent)?;
                continue;
            }
            if !child.is_element() {
                continue;
            }
            if child.tag_name().name() != "s" {
                return Err(self.violation(child, format!("unexpected element <{}> in {parent}", child.tag_name().name())));
            }
            let (text, ref_marks) = self.sentence_body(child)?;
            let text = normalize_whitespace(&text);
            if text.is_empty() {
                return Err(self.violation(child, "empty <s>"));
            }
            let tokens = tokenize(&text);
            out.push(Sentence {
                global_index: self.next_index,
                section_index,
                position_in_section: out.len() + 1,
                text,
                tokens,
                ref_marks,
            });
            self.next_index += 1;
        }
        Ok(out)
    }

    fn sentence_body(&self, node: roxmltree::Node) -> Result<(String, Vec<RefMark>), DocumentError> {
        let mut text = String::new();
        let mut refs = Vec::new();
        for child in node.children() {
            if child.is_text() {
                text.push_str(child.text().unwrap_or(""));
                continue;
            }
            if !child.is_element() {
                continue;
            }
            match child.tag_name().name() {
                "ref" => {
                    let type_attr = child.attribute("type").unwrap_or("");
                    let kind = RefKind::parse(type_attr).ok_or_else(|| {
                        self.violation(child, format!("<ref> type '{type_attr}' is not literature, table, figure or equation"))
                    })?;
                    let target = child.attribute("target").map(str::trim).unwrap_or("");
                    if target.is_empty() {
                        return Err(self.violation(child, "<ref> missing target"));
                    }
                    for inner in child.children() {
                        if inner.is_element() {
                            return Err(self.violation(inner, "<ref> must be empty"));
                        }
                        self.reject_text(inner, "<ref>")?;
                    }
                    text.push('[');
                    text.push_str(target);
                    text.push(']');
                    refs.push(RefMark { kind, target: target.to_owned(), resolved: false });
                }
                "s" => return Err(self.violation(child, "nested <s>")),
                other => return Err(self.violation(child, format!("unexpected element <{other}> in <s>"))),
            }
        }
        Ok((text, refs))
    }
}

fn resolve_refs(paper: &mut Paper, graphic_ids: &HashSet<String>) {
    let blocks = std::iter::once(&mut paper.abstract_sentences).chain(paper.sections.iter_mut().map(|s| &mut s.sentences));
    for block in blocks {
        for sentence in block.iter_mut() {
            for mark in &mut sentence.ref_marks {
                mark.resolved = mark.kind.is_graphic() && graphic_ids.contains(&mark.target);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document() {
        let p = parse_paper("<paper><title>T</title><abstract><s>A b c.</s></abstract></paper>").unwrap();
        assert_eq!(p.title, "T");
        assert_eq!(p.abstract_sentences.len(), 1);
        assert!(p.sections.is_empty());
        assert!(p.graphics.is_empty());
        assert_eq!(p.abstract_sentences[0].tokens, ["a", "b", "c"]);
        assert_eq!(p.abstract_sentences[0].position_in_section, 1);
    }

    #[test]
    fn figure_reference_resolves() {
        let xml = r#"<paper><title>T</title>
            <section name="Intro" kind="introduction"><s>See <ref type="figure" target="fig1"/>.</s></section>
            <graphic id="fig1" kind="figure" caption="c"/></paper>"#;
        let p = parse_paper(xml).unwrap();
        let s = &p.sections[0].sentences[0];
        assert_eq!(s.text, "See [fig1].");
        assert_eq!(s.ref_marks, vec![RefMark { kind: RefKind::Figure, target: "fig1".into(), resolved: true }]);
        assert_eq!(p.sections[0].kind, SectionKind::Introduction);
        assert_eq!(p.graphic("fig1").unwrap().caption, "c");
    }

    #[test]
    fn dangling_and_literature_refs() {
        let xml = r#"<paper><title>T</title><abstract>
            <s>Cf. <ref type="literature" target="fig1"/> and <ref type="table" target="tab9"/>.</s>
            </abstract><graphic id="fig1" kind="figure"/></paper>"#;
        let p = parse_paper(xml).unwrap();
        let marks = &p.abstract_sentences[0].ref_marks;
        assert!(!marks[0].resolved && !marks[0].is_dangling());
        assert!(marks[1].is_dangling());
        assert_eq!(p.dangling_refs().count(), 1);
    }

    #[test]
    fn unknown_kind_is_other() {
        let xml =
            r#"<paper><title>T</title><section name="X" kind="related"><s>a</s></section><section><s>b</s></section></paper>"#;
        let p = parse_paper(xml).unwrap();
        assert_eq!(p.sections[0].kind, SectionKind::Other);
        assert_eq!(p.sections[1].kind, SectionKind::Other);
        assert_eq!(p.sections[1].name, "");
    }

    #[test]
    fn malformed_xml_reports_position() {
        let err = parse_paper("<paper>\n<title>T</titl></paper>").unwrap_err();
        match err {
            DocumentError::MalformedXml { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn schema_violations() {
        let cases = [
            "<paper><abstract><s>a</s></abstract></paper>",
            "<paper><title>T</title><s>a</s></paper>",
            r#"<paper><title>T</title><graphic id="g" kind="figure"/><graphic id="g" kind="table"/></paper>"#,
            r#"<paper><title>T</title><graphic id="g" kind="chart"/></paper>"#,
            r#"<paper><title>T</title><abstract><s><ref type="cite" target="x"/></s></abstract></paper>"#,
            r#"<paper><title>T</title><abstract><s>   </s></abstract></paper>"#,
            "<doc><title>T</title></doc>",
            "<paper><title>T</title>stray</paper>",
        ];
        for xml in cases {
            assert!(
                matches!(parse_paper(xml), Err(DocumentError::SchemaViolation { .. })),
                "expected schema violation for {xml}"
            );
        }
    }

    #[test]
    fn whitespace_normalized_sentences() {
        let p = parse_paper("<paper><title> A\n  title </title><abstract><s>\n  one   two\n</s></abstract></paper>").unwrap();
        assert_eq!(p.title, "A title");
        assert_eq!(p.abstract_sentences[0].text, "one two");
    }

    #[test]
    fn slides_parsing() {
        assert_eq!(parse_slides("a\n\nb\n").unwrap().sentences, ["a", "b"]);
        assert_eq!(parse_slides("  \n---\n"), Err(DocumentError::EmptySlides));
        assert_eq!(parse_slides("  x   y \r\n• \n").unwrap().sentences, ["x y"]);
    }

    #[test]
    fn slides_fixture_line_count() {
        // 37 lines, 3 of them blank
        let text: String = (0..37).map(|i| if i % 12 == 5 { "\n".to_string() } else { format!("line {i}\n") }).collect();
        assert_eq!(text.lines().count(), 37);
        assert_eq!(text.lines().filter(|l| l.is_empty()).count(), 3);
        assert_eq!(parse_slides(&text).unwrap().sentences.len(), 34);
    }
}
