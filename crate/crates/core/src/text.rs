//! Tokenization and whitespace normalization shared by every stage.

/// Lowercases `text` and splits it on every maximal run of non-alphanumeric
/// characters. Empty tokens are dropped.
///
/// ```
/// assert_eq!(deckgen::text::tokenize("TF-IdF 2.5x"), ["tf", "idf", "2", "5x"]);
/// ```
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase().split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty()).map(str::to_owned).collect()
}

/// Collapses whitespace runs to a single space and trims both ends.
pub fn normalize_whitespace(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for word in text.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

/// Length in Unicode scalar values. Every size budget in the crate is
/// measured with this.
pub fn char_len(text: &str) -> usize {
    text.chars().count()
}

/// Uppercases the first character of each space-separated word.
pub fn title_case(words: &[String]) -> String {
    words
        .iter()
        .map(|w| {
            let mut chars = w.chars();
            match chars.next() {
                Some(first) => first.to_uppercase().chain(chars).collect::<String>(),
                None => String::new(),
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenize_examples() {
        assert_eq!(tokenize("The cat, sat!"), ["the", "cat", "sat"]);
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("TF-IdF 2.5x"), ["tf", "idf", "2", "5x"]);
        assert!(tokenize(" -- ,, ").is_empty());
    }

    #[test]
    fn normalize() {
        assert_eq!(normalize_whitespace("  a \n\t b  c "), "a b c");
        assert_eq!(normalize_whitespace(" \n "), "");
    }

    #[test]
    fn char_len_counts_scalars() {
        assert_eq!(char_len("naïve"), 5);
    }

    #[test]
    fn title_case_words() {
        let w = vec!["the".to_string(), "quick".to_string(), "fox".to_string()];
        assert_eq!(title_case(&w), "The Quick Fox");
    }
}
