//! Corpus ingestion.
//!
//! Corpora are line-delimited JSON. Each record carries an `id`, a `split`,
//! an optional `domain`, the article as either `sentences` (array) or `text`
//! (string, segmented here), and the reference `summary` as either an array of
//! sentences or a single string.

use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::Execution;

/// Number of lines parsed per parallel batch when streaming.
pub const STREAM_BATCH: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Valid,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Valid, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Valid => "valid",
            Split::Test => "test",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "train" => Ok(Split::Train),
            "valid" | "validation" | "val" | "dev" => Ok(Split::Valid),
            "test" => Ok(Split::Test),
            other => Err(format!("unknown split `{other}`")),
        }
    }
}

/// One article/summary pair. Sentences and summary sentences are token
/// sequences produced by [`tokenize`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub domain: Option<String>,
    pub split: Split,
    pub sentences: Vec<Vec<String>>,
    pub summary: Vec<Vec<String>>,
}

impl Document {
    pub fn num_sentences(&self) -> usize {
        self.sentences.len()
    }

    /// Article tokens with sentence boundaries removed.
    pub fn text_tokens(&self) -> Vec<&str> {
        flatten(&self.sentences)
    }

    /// Summary tokens with sentence boundaries removed.
    pub fn summary_tokens(&self) -> Vec<&str> {
        flatten(&self.summary)
    }

    pub fn text_len(&self) -> usize {
        self.sentences.iter().map(Vec::len).sum()
    }

    pub fn summary_len(&self) -> usize {
        self.summary.iter().map(Vec::len).sum()
    }

    /// Tokens of the selected sentences, concatenated in ascending index
    /// order. Out-of-range indices are ignored.
    pub fn selection_tokens(&self, selected: &[usize]) -> Vec<&str> {
        let mut idx: Vec<usize> = selected
            .iter()
            .copied()
            .filter(|&i| i < self.sentences.len())
            .collect();
        idx.sort_unstable();
        idx.dedup();
        idx.iter()
            .flat_map(|&i| self.sentences[i].iter().map(String::as_str))
            .collect()
    }
}

fn flatten(sents: &[Vec<String>]) -> Vec<&str> {
    sents
        .iter()
        .flat_map(|s| s.iter().map(String::as_str))
        .collect()
}

/// A record skipped during loading.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedRecord {
    pub line: usize,
    pub id: String,
    pub reason: &'static str,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub name: String,
    pub documents: Vec<Document>,
    pub skipped: Vec<SkippedRecord>,
}

impl Corpus {
    pub fn new(name: impl Into<String>, documents: Vec<Document>) -> Self {
        Corpus {
            name: name.into(),
            documents,
            skipped: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn split(&self, split: Split) -> impl Iterator<Item = &Document> + '_ {
        self.documents.iter().filter(move |d| d.split == split)
    }

    pub fn split_counts(&self) -> SplitCounts {
        let mut counts = SplitCounts::default();
        for d in &self.documents {
            counts.add(d.split);
        }
        counts
    }

    pub fn get(&self, id: &str) -> Option<&Document> {
        self.documents.iter().find(|d| d.id == id)
    }

    /// Writes the corpus in pre-segmented form (space-joined tokens).
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for d in &self.documents {
            let rec = OutRecord {
                id: &d.id,
                split: d.split,
                domain: d.domain.as_deref(),
                sentences: d.sentences.iter().map(|s| s.join(" ")).collect(),
                summary: d.summary.iter().map(|s| s.join(" ")).collect(),
            };
            serde_json::to_writer(&mut w, &rec)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct OutRecord<'a> {
    id: &'a str,
    split: Split,
    #[serde(skip_serializing_if = "Option::is_none")]
    domain: Option<&'a str>,
    sentences: Vec<String>,
    summary: Vec<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitCounts {
    pub train: usize,
    pub valid: usize,
    pub test: usize,
}

impl SplitCounts {
    pub fn add(&mut self, split: Split) {
        match split {
            Split::Train => self.train += 1,
            Split::Valid => self.valid += 1,
            Split::Test => self.test += 1,
        }
    }

    pub fn get(&self, split: Split) -> usize {
        [self.train, self.valid, self.test][split.index()]
    }

    pub fn total(&self) -> usize {
        self.train + self.valid + self.test
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum TextField {
    Lines(Vec<String>),
    Text(String),
}

#[derive(Deserialize)]
struct RawRecord {
    id: String,
    split: String,
    #[serde(default)]
    domain: Option<String>,
    #[serde(default)]
    sentences: Option<Vec<String>>,
    #[serde(default)]
    text: Option<String>,
    summary: TextField,
}

/// Outcome of parsing one non-blank line.
#[derive(Debug)]
pub enum ParsedLine {
    Document(Document),
    Skipped { id: String, reason: &'static str },
}

/// Raw article sentences of a record: given verbatim when pre-segmented,
/// otherwise produced by [`segment_sentences`].
pub fn raw_sentences(sentences: Option<&[String]>, text: Option<&str>) -> Option<Vec<String>> {
    match (sentences, text) {
        (Some(s), _) => Some(s.to_vec()),
        (None, Some(t)) => Some(segment_sentences(t)),
        (None, None) => None,
    }
}

fn tokenize_all(sents: impl IntoIterator<Item = impl AsRef<str>>) -> Vec<Vec<String>> {
    sents
        .into_iter()
        .map(|s| tokenize(s.as_ref()))
        .filter(|t| !t.is_empty())
        .collect()
}

/// Parses a single record line. Errors carry only the message; callers
/// attach the path and line number.
pub fn parse_record(line: &str) -> std::result::Result<ParsedLine, String> {
    let raw: RawRecord = serde_json::from_str(line).map_err(|e| e.to_string())?;
    let split: Split = raw.split.parse()?;
    let sentences = match raw_sentences(raw.sentences.as_deref(), raw.text.as_deref()) {
        Some(s) => tokenize_all(s),
        None => return Err("record has neither `sentences` nor `text`".into()),
    };
    let summary = match raw.summary {
        TextField::Lines(lines) => tokenize_all(lines),
        TextField::Text(t) => tokenize_all(segment_sentences(&t)),
    };
    if sentences.is_empty() {
        return Ok(ParsedLine::Skipped {
            id: raw.id,
            reason: "empty text",
        });
    }
    if summary.is_empty() {
        return Ok(ParsedLine::Skipped {
            id: raw.id,
            reason: "empty summary",
        });
    }
    Ok(ParsedLine::Document(Document {
        id: raw.id,
        domain: raw.domain,
        split,
        sentences,
        summary,
    }))
}

/// Streams documents from a corpus file in batches, parsing each batch with
/// the given execution strategy. Duplicate ids are detected across the whole
/// stream.
pub struct DocumentStream {
    path: PathBuf,
    reader: BufReader<File>,
    line_no: usize,
    seen: HashSet<String>,
    skipped: Vec<SkippedRecord>,
    exec: Execution,
    batch: usize,
    done: bool,
}

impl DocumentStream {
    pub fn open(path: impl AsRef<Path>, exec: Execution) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let file = File::open(&path).map_err(|e| Error::io(&path, e))?;
        Ok(DocumentStream {
            path,
            reader: BufReader::new(file),
            line_no: 0,
            seen: HashSet::new(),
            skipped: Vec::new(),
            exec,
            batch: STREAM_BATCH,
            done: false,
        })
    }

    pub fn with_batch_size(mut self, batch: usize) -> Self {
        self.batch = batch.max(1);
        self
    }

    pub fn skipped(&self) -> &[SkippedRecord] {
        &self.skipped
    }

    pub fn into_skipped(self) -> Vec<SkippedRecord> {
        self.skipped
    }

    /// Next batch of documents in file order, or `None` at end of file.
    pub fn next_batch(&mut self) -> Result<Option<Vec<Document>>> {
        if self.done {
            return Ok(None);
        }
        let mut lines = Vec::with_capacity(self.batch);
        while lines.len() < self.batch {
            let mut buf = String::new();
            let n = self
                .reader
                .read_line(&mut buf)
                .map_err(|e| Error::io(&self.path, e))?;
            if n == 0 {
                self.done = true;
                break;
            }
            self.line_no += 1;
            if buf.trim().is_empty() {
                continue;
            }
            lines.push((self.line_no, buf));
        }
        if lines.is_empty() {
            return Ok(None);
        }
        let parsed = self
            .exec
            .map(&lines, |(_, l)| parse_record(l.trim_end_matches(['\n', '\r'])));
        let mut docs = Vec::with_capacity(lines.len());
        for ((line, _), res) in lines.iter().zip(parsed) {
            match res {
                Ok(ParsedLine::Document(d)) => {
                    if !self.seen.insert(d.id.clone()) {
                        return Err(Error::DuplicateId {
                            path: self.path.clone(),
                            line: *line,
                            id: d.id,
                        });
                    }
                    docs.push(d);
                }
                Ok(ParsedLine::Skipped { id, reason }) => {
                    if !self.seen.insert(id.clone()) {
                        return Err(Error::DuplicateId {
                            path: self.path.clone(),
                            line: *line,
                            id,
                        });
                    }
                    self.skipped.push(SkippedRecord {
                        line: *line,
                        id,
                        reason,
                    });
                }
                Err(message) => {
                    return Err(Error::Parse {
                        path: self.path.clone(),
                        line: *line,
                        message,
                    })
                }
            }
        }
        Ok(Some(docs))
    }
}

/// Loads a whole corpus into memory.
pub fn load_corpus(path: impl AsRef<Path>, name: &str) -> Result<Corpus> {
    load_corpus_with(path, name, Execution::default())
}

pub fn load_corpus_with(path: impl AsRef<Path>, name: &str, exec: Execution) -> Result<Corpus> {
    let mut stream = DocumentStream::open(path, exec)?;
    let mut documents = Vec::new();
    while let Some(batch) = stream.next_batch()? {
        documents.extend(batch);
    }
    Ok(Corpus {
        name: name.to_string(),
        documents,
        skipped: stream.into_skipped(),
    })
}

/// Corpus name derived from a file path (file stem).
pub fn corpus_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Lowercases and splits on whitespace; every character that is neither
/// alphanumeric nor whitespace becomes its own token.
pub fn tokenize(text: &str) -> Vec<String> {
    let lower = text.to_lowercase();
    let mut tokens = Vec::new();
    let mut cur = String::new();
    for c in lower.chars() {
        if c.is_alphanumeric() {
            cur.push(c);
        } else {
            if !cur.is_empty() {
                tokens.push(std::mem::take(&mut cur));
            }
            if !c.is_whitespace() {
                tokens.push(c.to_string());
            }
        }
    }
    if !cur.is_empty() {
        tokens.push(cur);
    }
    tokens
}

const ABBREVIATIONS: &[&str] = &[
    "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "mt", "vs", "etc", "inc", "ltd", "co",
    "corp", "dept", "gen", "gov", "sen", "rep", "rev", "col", "lt", "sgt", "capt", "cmdr", "adm",
    "no", "jan", "feb", "mar", "apr", "jun", "jul", "aug", "sep", "sept", "oct", "nov", "dec",
    "u.s", "u.k", "u.n", "e.g", "i.e", "a.m", "p.m", "fig", "approx", "est", "al",
];

fn is_abbreviation(word: &str) -> bool {
    let w = word
        .trim_start_matches(|c: char| !c.is_alphanumeric())
        .to_lowercase();
    if w.chars().count() == 1 && w.chars().all(char::is_alphabetic) {
        // initials such as "J. Smith"
        return true;
    }
    ABBREVIATIONS.contains(&w.as_str())
}

/// Splits raw text into sentences after `.`, `!` or `?` when the mark is
/// followed by whitespace and then an uppercase letter (or the end of the
/// text). A period ending a known abbreviation or an initial never splits.
pub fn segment_sentences(text: &str) -> Vec<String> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut start = 0usize;
    let mut i = 0usize;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if matches!(c, '.' | '!' | '?') && i + 1 < chars.len() && chars[i + 1].1.is_whitespace() {
            let mut k = i + 1;
            while k < chars.len() && chars[k].1.is_whitespace() {
                k += 1;
            }
            let next_upper = k == chars.len() || chars[k].1.is_uppercase();
            let abbrev = c == '.' && {
                let head = &text[start..pos];
                let word = head.rsplit(char::is_whitespace).next().unwrap_or("");
                is_abbreviation(word)
            };
            if next_upper && !abbrev {
                let end = pos + c.len_utf8();
                push_trimmed(&mut out, &text[start..end]);
                start = if k < chars.len() { chars[k].0 } else { text.len() };
                i = k;
                continue;
            }
        }
        i += 1;
    }
    push_trimmed(&mut out, &text[start..]);
    out
}

fn push_trimmed(out: &mut Vec<String>, s: &str) {
    let t = s.trim();
    if !t.is_empty() {
        out.push(t.to_string());
    }
}
