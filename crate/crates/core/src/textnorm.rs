//! Token normalization and n-gram pattern extraction for content mining.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Embedded English stopword list, one token per line.
pub const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords_en.txt");

/// Replacement for any token containing a decimal digit.
pub const NUMBER_MASK: &str = "0";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stopwords {
    words: HashSet<String>,
}

impl Stopwords {
    pub fn parse(list: &str) -> Self {
        let words = list
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(str::to_lowercase)
            .collect();
        Stopwords { words }
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&text))
    }

    pub fn english() -> &'static Stopwords {
        static LIST: OnceLock<Stopwords> = OnceLock::new();
        LIST.get_or_init(|| Stopwords::parse(DEFAULT_STOPWORDS))
    }

    pub fn contains(&self, token: &str) -> bool {
        self.words.contains(token)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// A token made only of non-alphanumeric characters.
pub fn is_punctuation(token: &str) -> bool {
    !token.is_empty() && !token.chars().any(char::is_alphanumeric)
}

pub fn has_digit(token: &str) -> bool {
    token.chars().any(|c| c.is_ascii_digit())
}

/// Tokens that are neither stopwords nor punctuation, unchanged otherwise.
pub fn content_tokens<'a, S: AsRef<str>>(tokens: &'a [S], stopwords: &Stopwords) -> Vec<&'a str> {
    tokens
        .iter()
        .map(AsRef::as_ref)
        .filter(|t| !t.is_empty() && !is_punctuation(t) && !stopwords.contains(t))
        .collect()
}

/// Stopword/punctuation removal, number masking, then lemmatization, using
/// the embedded stopword list.
pub fn normalize_tokens<S: AsRef<str>>(tokens: &[S]) -> Vec<String> {
    normalize_with(tokens, Stopwords::english())
}

pub fn normalize_with<S: AsRef<str>>(tokens: &[S], stopwords: &Stopwords) -> Vec<String> {
    content_tokens(tokens, stopwords)
        .into_iter()
        .map(|t| {
            if has_digit(t) {
                NUMBER_MASK.to_string()
            } else {
                lemmatize_with(t, stopwords)
            }
        })
        .collect()
}

const IRREGULAR: &[(&str, &str)] = &[
    ("men", "man"),
    ("women", "woman"),
    ("children", "child"),
    ("people", "person"),
    ("mice", "mouse"),
    ("feet", "foot"),
    ("teeth", "tooth"),
    ("geese", "goose"),
    ("wives", "wife"),
    ("knives", "knife"),
    ("analyses", "analysis"),
    ("crises", "crisis"),
    ("went", "go"),
    ("gone", "go"),
    ("took", "take"),
    ("taken", "take"),
    ("made", "make"),
    ("saw", "see"),
    ("seen", "see"),
    ("got", "get"),
    ("gotten", "get"),
    ("gave", "give"),
    ("given", "give"),
    ("came", "come"),
    ("knew", "know"),
    ("known", "know"),
    ("thought", "think"),
    ("told", "tell"),
    ("found", "find"),
    ("felt", "feel"),
    ("brought", "bring"),
    ("bought", "buy"),
    ("kept", "keep"),
    ("held", "hold"),
    ("ran", "run"),
    ("began", "begin"),
    ("begun", "begin"),
    ("wrote", "write"),
    ("written", "write"),
    ("spoke", "speak"),
    ("spoken", "speak"),
    ("stood", "stand"),
    ("lost", "lose"),
    ("paid", "pay"),
    ("met", "meet"),
    ("sent", "send"),
    ("built", "build"),
    ("sold", "sell"),
    ("fell", "fall"),
    ("fallen", "fall"),
    ("led", "lead"),
    ("died", "die"),
    ("lying", "lie"),
    ("dying", "die"),
];

fn irregular(word: &str) -> Option<&'static str> {
    static TABLE: OnceLock<HashMap<&'static str, &'static str>> = OnceLock::new();
    TABLE
        .get_or_init(|| IRREGULAR.iter().copied().collect())
        .get(word)
        .copied()
}

fn is_vowel(c: u8) -> bool {
    matches!(c, b'a' | b'e' | b'i' | b'o' | b'u')
}

fn has_vowel(s: &str) -> bool {
    s.bytes().any(|b| is_vowel(b) || b == b'y')
}

/// Restores a stem left after removing -ed/-ing.
fn fix_stem(stem: &str) -> String {
    let b = stem.as_bytes();
    let n = b.len();
    if n >= 2 && b[n - 1] == b[n - 2] && !is_vowel(b[n - 1]) && !matches!(b[n - 1], b'l' | b's' | b'z') {
        return stem[..n - 1].to_string();
    }
    if stem.ends_with("at") || stem.ends_with("bl") || stem.ends_with("iz") || stem.ends_with("uc") {
        return format!("{stem}e");
    }
    stem.to_string()
}

/// One rewrite step, or `None` when no rule applies.
fn lemma_step(w: &str) -> Option<String> {
    if let Some(l) = irregular(w) {
        return Some(l.to_string());
    }
    if !w.is_ascii() {
        return None;
    }
    let n = w.len();
    if n > 4 && w.ends_with("ies") {
        return Some(format!("{}y", &w[..n - 3]));
    }
    if w.ends_with("sses") {
        return Some(w[..n - 2].to_string());
    }
    if n > 4 && ["ches", "shes", "xes", "zes"].iter().any(|s| w.ends_with(s)) {
        return Some(w[..n - 2].to_string());
    }
    if n > 3 && w.ends_with('s') && !["ss", "us", "is", "ous"].iter().any(|s| w.ends_with(s)) {
        return Some(w[..n - 1].to_string());
    }
    if n > 4 && w.ends_with("ied") {
        return Some(format!("{}y", &w[..n - 3]));
    }
    if n > 4 && w.ends_with("ed") && !w.ends_with("eed") {
        let stem = &w[..n - 2];
        if has_vowel(stem) {
            return Some(fix_stem(stem));
        }
    }
    if n > 5 && w.ends_with("ing") {
        let stem = &w[..n - 3];
        if stem.len() >= 3 && has_vowel(stem) {
            return Some(fix_stem(stem));
        }
    }
    None
}

/// Rule-based lemma using the embedded stopword list.
pub fn lemmatize(word: &str) -> String {
    lemmatize_with(word, Stopwords::english())
}

/// Applies rewrite rules until a fixed point. A rewrite that would produce a
/// stopword is not taken, so the result is itself a fixed point.
pub fn lemmatize_with(word: &str, stopwords: &Stopwords) -> String {
    let mut cur = word.to_string();
    for _ in 0..8 {
        match lemma_step(&cur) {
            Some(next) if next != cur && !next.is_empty() && !stopwords.contains(&next) => cur = next,
            _ => break,
        }
    }
    cur
}

/// A normalized bigram or trigram, stored as its space-joined tokens.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pattern {
    text: String,
}

impl Pattern {
    /// `None` unless there are 2 or 3 tokens, each non-empty and free of
    /// whitespace.
    pub fn new<S: AsRef<str>>(tokens: impl IntoIterator<Item = S>) -> Option<Self> {
        let mut text = String::new();
        let mut n = 0;
        for t in tokens {
            let t = t.as_ref();
            if t.is_empty() || t.contains(char::is_whitespace) {
                return None;
            }
            if n > 0 {
                text.push(' ');
            }
            text.push_str(t);
            n += 1;
        }
        (2..=3).contains(&n).then_some(Pattern { text })
    }

    pub fn tokens(&self) -> Vec<&str> {
        self.text.split(' ').collect()
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn len(&self) -> usize {
        self.text.bytes().filter(|&b| b == b' ').count() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

/// All contiguous bigrams and trigrams of an already-normalized sequence,
/// with multiplicity, in order of starting position.
pub fn extract_patterns<S: AsRef<str>>(tokens: &[S]) -> Vec<Pattern> {
    let mut out = Vec::new();
    for i in 0..tokens.len() {
        for n in 2..=3 {
            if i + n <= tokens.len() {
                out.extend(Pattern::new(&tokens[i..i + n]));
            }
        }
    }
    out
}

/// Normalizes a raw sentence and extracts its patterns.
pub fn sentence_patterns<S: AsRef<str>>(tokens: &[S]) -> Vec<Pattern> {
    extract_patterns(&normalize_tokens(tokens))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use sha2::{Digest, Sha256};

    fn pat(xs: &[&str]) -> Pattern {
        Pattern::new(xs.iter().copied()).unwrap()
    }

    #[test]
    fn stopword_list_is_pinned() {
        let digest = hex::encode(Sha256::digest(DEFAULT_STOPWORDS.as_bytes()));
        assert_eq!(
            digest,
            "449fdf961fae7c56a3e220c3e423e76f603fca6125f89b7ecde575663374ab4b"
        );
        assert_eq!(Stopwords::english().len(), 154);
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize_tokens(&["the", "cats", "sat", ","]), ["cat", "sat"]);
        assert_eq!(normalize_tokens(&["in", "1999", ","]), ["0"]);
        assert!(normalize_tokens::<&str>(&[]).is_empty());
        assert_eq!(normalize_tokens(&["3rd", "5", "%"]), ["0", "0"]);
    }

    #[test]
    fn lemma_rules() {
        let cases = [
            ("cats", "cat"),
            ("studies", "study"),
            ("classes", "class"),
            ("boxes", "box"),
            ("matches", "match"),
            ("stopped", "stop"),
            ("created", "create"),
            ("running", "run"),
            ("meetings", "meet"),
            ("bus", "bus"),
            ("analysis", "analysis"),
            ("string", "string"),
            ("bring", "bring"),
            ("children", "child"),
            ("went", "go"),
            ("famous", "famous"),
            ("ties", "tie"),
        ];
        for (w, l) in cases {
            assert_eq!(lemmatize(w), l, "{w}");
        }
    }

    #[test]
    fn lemma_never_produces_stopword() {
        // "doing" -> "do" would be a stopword; the rewrite is refused.
        let sw = Stopwords::parse("do\n");
        assert_eq!(lemmatize_with("doing", &sw), "doing");
    }

    #[test]
    fn pattern_extraction() {
        let mut got = extract_patterns(&["a", "b", "c"]);
        got.sort();
        assert_eq!(got, vec![pat(&["a", "b"]), pat(&["a", "b", "c"]), pat(&["b", "c"])]);
        assert!(extract_patterns(&["a"]).is_empty());

        let got = extract_patterns(&["a", "b", "a", "b"]);
        let mut counts: HashMap<Pattern, usize> = HashMap::new();
        for p in got {
            *counts.entry(p).or_default() += 1;
        }
        assert_eq!(counts[&pat(&["a", "b"])], 2);
        assert_eq!(counts[&pat(&["b", "a"])], 1);
        assert_eq!(counts[&pat(&["a", "b", "a"])], 1);
        assert_eq!(counts[&pat(&["b", "a", "b"])], 1);
        assert_eq!(counts.len(), 4);
    }

    #[test]
    fn pattern_arity() {
        assert!(Pattern::new(["a"]).is_none());
        assert!(Pattern::new(["a", "b", "c", "d"]).is_none());
    }

    fn word() -> impl Strategy<Value = String> {
        prop_oneof![
            "[a-z]{1,8}(s|es|ies|ed|ing|ings|sses|ied)?",
            "[0-9]{1,4}",
            "[.,;!?%]",
            proptest::sample::select(vec!["the", "of", "and", "doing", "is", "said"])
                .prop_map(String::from),
        ]
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(tokens in proptest::collection::vec(word(), 0..30)) {
            let once = normalize_tokens(&tokens);
            let twice = normalize_tokens(&once);
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn patterns_are_clean(tokens in proptest::collection::vec(word(), 0..30)) {
            let sw = Stopwords::english();
            for p in sentence_patterns(&tokens) {
                prop_assert!((2..=3).contains(&p.len()));
                for t in p.tokens() {
                    prop_assert!(!sw.contains(t));
                    prop_assert!(!is_punctuation(t));
                    prop_assert!(t == NUMBER_MASK || !has_digit(t));
                }
            }
        }
    }
}
