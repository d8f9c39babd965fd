//! Whitespace tokenisation and punctuation handling shared by the
//! augmentation baselines and the lexical metrics.

use std::sync::OnceLock;

use regex::Regex;

fn punctuation() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\p{P}").expect("valid punctuation regex"))
}

/// Removes every character in the Unicode punctuation categories.
pub fn strip_punctuation(s: &str) -> String {
    punctuation().replace_all(s, "").into_owned()
}

/// Whitespace tokens of `s`.
pub fn tokens(s: &str) -> impl Iterator<Item = &str> {
    s.split_whitespace()
}

/// Tokens with punctuation removed; tokens that consist only of punctuation
/// are dropped.
pub fn words_without_punctuation(s: &str) -> Vec<String> {
    tokens(s)
        .map(strip_punctuation)
        .filter(|w| !w.is_empty())
        .collect()
}

/// Lowercased, punctuation-stripped word forms used for set comparisons.
pub fn normalized_words(s: &str) -> Vec<String> {
    tokens(s)
        .map(|t| strip_punctuation(&t.to_lowercase()))
        .filter(|w| !w.is_empty())
        .collect()
}
