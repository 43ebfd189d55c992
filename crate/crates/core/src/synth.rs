//! Seeded synthetic corpora with planted structure, for tests and benchmarks.
//!
//! Words are consonant-vowel syllable strings under a per-corpus prefix, so
//! corpora with different prefixes share no vocabulary and no word is a
//! stopword or carries an inflectional suffix.

use std::io::{self, Write};
use std::ops::RangeInclusive;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::corpus::{parse_record, Document, ParsedLine};

const CONSONANTS: &[u8] = b"bdfgklmnprstvz";
const VOWELS: &[u8] = b"aeiou";

/// Where summary sentences are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Head,
    Middle,
    Tail,
    Spread,
}

#[derive(Debug, Clone)]
pub struct SynthSpec {
    pub docs: usize,
    pub seed: u64,
    pub prefix: String,
    pub vocab: usize,
    pub sentences: RangeInclusive<usize>,
    pub sentence_len: RangeInclusive<usize>,
    pub summary_sentences: RangeInclusive<usize>,
    pub region: Region,
    /// Size of the pool of three-word phrases planted in summary-worthy
    /// sentences; zero plants nothing.
    pub phrases: usize,
    /// Train and valid fractions; the rest is test.
    pub train: f64,
    pub valid: f64,
    pub domains: Vec<String>,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            docs: 100,
            seed: 1,
            prefix: "ka".into(),
            vocab: 400,
            sentences: 8..=20,
            sentence_len: 8..=16,
            summary_sentences: 2..=4,
            region: Region::Spread,
            phrases: 0,
            train: 0.6,
            valid: 0.2,
            domains: Vec::new(),
        }
    }
}

/// Deterministic word for index `i` under `prefix`.
pub fn word(prefix: &str, mut i: usize) -> String {
    let base = CONSONANTS.len() * VOWELS.len();
    let mut w = prefix.to_string();
    for _ in 0..2 {
        let s = i % base;
        w.push(CONSONANTS[s / VOWELS.len()] as char);
        w.push(VOWELS[s % VOWELS.len()] as char);
        i /= base;
    }
    while i > 0 {
        let s = i % base;
        w.push(CONSONANTS[s / VOWELS.len()] as char);
        w.push(VOWELS[s % VOWELS.len()] as char);
        i /= base;
    }
    w
}

fn sentence_text(words: &[String]) -> String {
    let mut s = words.join(" ");
    if let Some(first) = s.get(..1) {
        let upper = first.to_ascii_uppercase();
        s.replace_range(..1, &upper);
    }
    s.push('.');
    s
}

fn summary_indices(rng: &mut ChaCha8Rng, region: Region, n: usize, k: usize) -> Vec<usize> {
    let k = k.min(n);
    match region {
        Region::Head => (0..k).collect(),
        Region::Tail => (n - k..n).collect(),
        Region::Middle => {
            let start = (n / 2).saturating_sub(k / 2).min(n - k);
            (start..start + k).collect()
        }
        Region::Spread => {
            let mut all: Vec<usize> = (0..n).collect();
            all.shuffle(rng);
            let mut v = all[..k].to_vec();
            v.sort_unstable();
            v
        }
    }
}

/// Generates record `i` of the corpus. Each record is independent of the
/// others given the spec, so corpora can be streamed.
pub fn record(spec: &SynthSpec, i: usize) -> Value {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let phrase_pool: Vec<[String; 3]> = (0..spec.phrases)
        .map(|p| {
            let base = spec.vocab + 3 * p;
            [word(&spec.prefix, base), word(&spec.prefix, base + 1), word(&spec.prefix, base + 2)]
        })
        .collect();
    let n = rng.gen_range(spec.sentences.clone());
    let mut sentences: Vec<Vec<String>> = (0..n)
        .map(|_| {
            let len = rng.gen_range(spec.sentence_len.clone());
            (0..len).map(|_| word(&spec.prefix, rng.gen_range(0..spec.vocab))).collect()
        })
        .collect();
    let k = rng.gen_range(spec.summary_sentences.clone());
    let picked = summary_indices(&mut rng, spec.region, n, k);
    if !phrase_pool.is_empty() {
        for &s in &picked {
            let phrase = &phrase_pool[rng.gen_range(0..phrase_pool.len())];
            let at = rng.gen_range(0..=sentences[s].len());
            for (o, w) in phrase.iter().enumerate() {
                sentences[s].insert(at + o, w.clone());
            }
        }
    }
    let summary: Vec<String> = picked.iter().map(|&s| sentence_text(&sentences[s])).collect();
    let r: f64 = rng.gen();
    let split = if r < spec.train {
        "train"
    } else if r < spec.train + spec.valid {
        "valid"
    } else {
        "test"
    };
    let mut rec = json!({
        "id": format!("{}-{i:06}", spec.prefix),
        "split": split,
        "sentences": sentences.iter().map(|s| sentence_text(s)).collect::<Vec<_>>(),
        "summary": summary,
    });
    if !spec.domains.is_empty() {
        rec["domain"] = Value::from(spec.domains[i % spec.domains.len()].clone());
    }
    rec
}

/// Writes the corpus as line-delimited JSON.
pub fn write_corpus<W: Write>(spec: &SynthSpec, mut w: W) -> io::Result<()> {
    for i in 0..spec.docs {
        serde_json::to_writer(&mut w, &record(spec, i))?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

/// The corpus parsed in memory.
pub fn documents(spec: &SynthSpec) -> Vec<Document> {
    (0..spec.docs)
        .filter_map(|i| match parse_record(&record(spec, i).to_string()) {
            Ok(ParsedLine::Document(d)) => Some(d),
            _ => None,
        })
        .collect()
}
