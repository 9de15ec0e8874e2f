//! Bundled stopword list and word→POS lexicon, plus the chunkers built on them.

use std::collections::{HashMap, HashSet};

const STOPWORDS: &str = include_str!("../data/stopwords.txt");
const POS_LEXICON: &str = include_str!("../data/pos_lexicon.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PosTag {
    Noun,
    Verb,
    Adj,
    Det,
    Other,
}

impl PosTag {
    fn parse(tag: &str) -> Option<Self> {
        match tag {
            "NOUN" => Some(PosTag::Noun),
            "VERB" => Some(PosTag::Verb),
            "ADJ" => Some(PosTag::Adj),
            "DET" => Some(PosTag::Det),
            "OTHER" => Some(PosTag::Other),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    pub stopwords: HashSet<String>,
    pub pos: HashMap<String, PosTag>,
}

impl Lexicon {
    /// The lists shipped in `data/`.
    pub fn bundled() -> Self {
        let stopwords = data_lines(STOPWORDS).map(str::to_owned).collect();
        let pos = data_lines(POS_LEXICON)
            .map(|line| {
                let (word, tag) = line.split_once('\t').expect("bundled lexicon row has a tab");
                (word.to_owned(), PosTag::parse(tag).expect("bundled lexicon tag is valid"))
            })
            .collect();
        Lexicon { stopwords, pos }
    }

    pub fn tag(&self, word: &str) -> PosTag {
        self.pos.get(word).copied().unwrap_or(PosTag::Noun)
    }

    pub fn is_stopword(&self, word: &str) -> bool {
        self.stopwords.contains(word)
    }

    /// Maximal `DET? ADJ* NOUN+` runs, scanned left to right.
    pub fn noun_phrases<'t>(&self, tokens: &'t [String]) -> Vec<&'t [String]> {
        let tags: Vec<PosTag> = tokens.iter().map(|t| self.tag(t)).collect();
        let mut phrases = Vec::new();
        let mut start = 0;
        while start < tokens.len() {
            let mut i = start;
            if tags[i] == PosTag::Det {
                i += 1;
            }
            while i < tags.len() && tags[i] == PosTag::Adj {
                i += 1;
            }
            let nouns_from = i;
            while i < tags.len() && tags[i] == PosTag::Noun {
                i += 1;
            }
            if i > nouns_from {
                phrases.push(&tokens[start..i]);
                start = i;
            } else {
                start += 1;
            }
        }
        phrases
    }

    /// Number of maximal runs of verb-tagged tokens.
    pub fn verb_phrase_count(&self, tokens: &[String]) -> usize {
        let mut count = 0;
        let mut in_run = false;
        for t in tokens {
            let verb = self.tag(t) == PosTag::Verb;
            if verb && !in_run {
                count += 1;
            }
            in_run = verb;
        }
        count
    }
}

fn data_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines().map(str::trim_end).filter(|l| !l.is_empty() && !l.starts_with('#'))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(words: &[&str]) -> Vec<String> {
        words.iter().map(|w| w.to_string()).collect()
    }

    fn lexicon(entries: &[(&str, PosTag)]) -> Lexicon {
        Lexicon { stopwords: HashSet::from(["the".to_string()]), pos: entries.iter().map(|(w, t)| (w.to_string(), *t)).collect() }
    }

    #[test]
    fn bundled_lists_load() {
        let lex = Lexicon::bundled();
        assert!(lex.is_stopword("the"));
        assert!(!lex.stopwords.is_empty());
        assert_eq!(lex.tag("the"), PosTag::Det);
        assert_eq!(lex.tag("zyxwv"), PosTag::Noun);
    }

    #[test]
    fn quick_fox_phrase() {
        let lex = lexicon(&[("the", PosTag::Det), ("quick", PosTag::Adj), ("fox", PosTag::Noun), ("runs", PosTag::Verb)]);
        let t = toks(&["the", "quick", "fox", "runs"]);
        assert_eq!(lex.noun_phrases(&t), vec![&t[0..3]]);
        assert_eq!(lex.verb_phrase_count(&t), 1);
    }

    #[test]
    fn all_verbs_have_no_phrases() {
        let lex = lexicon(&[("go", PosTag::Verb), ("run", PosTag::Verb)]);
        assert!(lex.noun_phrases(&toks(&["go", "run", "go"])).is_empty());
        assert_eq!(lex.verb_phrase_count(&toks(&["go", "run", "go"])), 1);
    }

    #[test]
    fn two_phrases_around_a_verb() {
        let lex = lexicon(&[
            ("deep", PosTag::Adj),
            ("model", PosTag::Noun),
            ("beats", PosTag::Verb),
            ("strong", PosTag::Adj),
            ("baseline", PosTag::Noun),
        ]);
        let t = toks(&["deep", "model", "beats", "strong", "baseline"]);
        assert_eq!(lex.noun_phrases(&t), vec![&t[0..2], &t[3..5]]);
    }

    #[test]
    fn dangling_determiner_restarts() {
        let lex = lexicon(&[("the", PosTag::Det), ("big", PosTag::Adj)]);
        let t = toks(&["the", "the", "cat", "big"]);
        assert_eq!(lex.noun_phrases(&t), vec![&t[1..3]]);
    }
}
