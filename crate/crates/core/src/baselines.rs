//! Extractive baselines: greedy oracle labels, Lead-k, and corpus-level
//! evaluation of any sentence selection.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Document, Split};
use crate::error::{Error, Result};
use crate::metrics::{rouge_n_counts, NgramCounts, RougeMean, RougeTriple};
use crate::par::Execution;

/// Selected sentence indices (0-based) of one document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelSet {
    #[serde(rename = "id")]
    pub doc_id: String,
    pub selected: Vec<usize>,
}

impl LabelSet {
    pub fn new(doc_id: impl Into<String>, selected: Vec<usize>) -> Self {
        LabelSet {
            doc_id: doc_id.into(),
            selected,
        }
    }

    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.selected.contains(&idx)
    }

    /// Indices ascending.
    pub fn sorted(&self) -> Vec<usize> {
        let mut v = self.selected.clone();
        v.sort_unstable();
        v
    }

    /// Checks uniqueness and range against a document with `n` sentences.
    pub fn validate(&self, n: usize) -> Result<()> {
        let mut seen = vec![false; n];
        for &i in &self.selected {
            if i >= n {
                return Err(Error::InvalidArgument(format!(
                    "label for `{}` selects sentence {i} of a {n}-sentence document",
                    self.doc_id
                )));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidArgument(format!(
                    "label for `{}` selects sentence {i} twice",
                    self.doc_id
                )));
            }
        }
        Ok(())
    }
}

/// Label sets keyed by document id, kept in insertion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Labels {
    sets: Vec<LabelSet>,
    index: HashMap<String, usize>,
}

impl Labels {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts or replaces the set for its document.
    pub fn insert(&mut self, set: LabelSet) {
        match self.index.get(&set.doc_id) {
            Some(&i) => self.sets[i] = set,
            None => {
                self.index.insert(set.doc_id.clone(), self.sets.len());
                self.sets.push(set);
            }
        }
    }

    pub fn get(&self, doc_id: &str) -> Option<&LabelSet> {
        self.index.get(doc_id).map(|&i| &self.sets[i])
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &LabelSet> {
        self.sets.iter()
    }

    pub fn read_jsonl(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut labels = Labels::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message,
            };
            let set: LabelSet = serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
            if labels.get(&set.doc_id).is_some() {
                return Err(parse_err(format!("duplicate label id `{}`", set.doc_id)));
            }
            labels.insert(set);
        }
        Ok(labels)
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for set in &self.sets {
            serde_json::to_writer(&mut w, set)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn write_file(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        self.write_jsonl(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(path, e))
    }
}

impl FromIterator<LabelSet> for Labels {
    fn from_iter<I: IntoIterator<Item = LabelSet>>(iter: I) -> Self {
        let mut labels = Labels::new();
        for s in iter {
            labels.insert(s);
        }
        labels
    }
}

/// Oracle objective: mean of ROUGE-1 and ROUGE-2 f1.
pub fn oracle_objective<T: std::hash::Hash + Eq>(candidate: &[T], reference: &[T]) -> f64 {
    let r1 = rouge_n_counts(&NgramCounts::new(candidate, 1), &NgramCounts::new(reference, 1));
    let r2 = rouge_n_counts(&NgramCounts::new(candidate, 2), &NgramCounts::new(reference, 2));
    (r1.f1 + r2.f1) / 2.0
}

/// Selection order of a greedy run and the objective after each accepted step.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleTrace {
    pub selected: Vec<usize>,
    pub objectives: Vec<f64>,
}

impl OracleTrace {
    pub fn objective(&self) -> f64 {
        self.objectives.last().copied().unwrap_or(0.0)
    }
}

struct Interned {
    sentences: Vec<Vec<u32>>,
    summary: Vec<u32>,
}

fn intern(doc: &Document) -> Interned {
    fn id<'a>(ids: &mut HashMap<&'a str, u32>, t: &'a str) -> u32 {
        let next = ids.len() as u32;
        *ids.entry(t).or_insert(next)
    }
    let mut ids: HashMap<&str, u32> = HashMap::new();
    let summary: Vec<u32> = doc.summary_tokens().into_iter().map(|t| id(&mut ids, t)).collect();
    let sentences = doc
        .sentences
        .iter()
        .map(|s| s.iter().map(|t| id(&mut ids, t)).collect())
        .collect();
    Interned { sentences, summary }
}

/// Greedy oracle: repeatedly adds the sentence whose inclusion maximizes
/// [`oracle_objective`] of the selection (concatenated in index order)
/// against the summary. Stops when no sentence strictly improves the
/// objective or `max_sentences` is reached. Ties go to the lowest index.
pub fn greedy_oracle_trace(doc: &Document, max_sentences: Option<usize>) -> OracleTrace {
    let Interned { sentences, summary } = intern(doc);
    let ref1 = NgramCounts::new(&summary, 1);
    let ref2 = NgramCounts::new(&summary, 2);
    let limit = max_sentences.unwrap_or(usize::MAX).min(sentences.len());

    let mut chosen = vec![false; sentences.len()];
    let mut trace = OracleTrace {
        selected: Vec::new(),
        objectives: Vec::new(),
    };
    let mut current = 0.0f64;
    let mut buf: Vec<u32> = Vec::new();

    while trace.selected.len() < limit {
        let mut best: Option<(usize, f64)> = None;
        for cand in 0..sentences.len() {
            if chosen[cand] {
                continue;
            }
            buf.clear();
            for (i, s) in sentences.iter().enumerate() {
                if chosen[i] || i == cand {
                    buf.extend_from_slice(s);
                }
            }
            let c1 = NgramCounts::new(&buf, 1);
            let c2 = NgramCounts::new(&buf, 2);
            let obj = (rouge_n_counts(&c1, &ref1).f1 + rouge_n_counts(&c2, &ref2).f1) / 2.0;
            if best.is_none_or(|(_, b)| obj > b) {
                best = Some((cand, obj));
            }
        }
        match best {
            Some((idx, obj)) if obj > current => {
                chosen[idx] = true;
                trace.selected.push(idx);
                trace.objectives.push(obj);
                current = obj;
            }
            _ => break,
        }
    }
    trace
}

pub fn greedy_oracle(doc: &Document, max_sentences: Option<usize>) -> LabelSet {
    LabelSet::new(doc.id.clone(), greedy_oracle_trace(doc, max_sentences).selected)
}

/// Greedy oracle labels for every document, in document order.
pub fn oracle_labels<'a>(
    docs: &[&'a Document],
    max_sentences: Option<usize>,
    exec: Execution,
) -> Labels {
    exec.map(docs, |d| greedy_oracle(d, max_sentences))
        .into_iter()
        .collect()
}

/// First `min(k, n)` sentences.
pub fn lead_k(doc: &Document, k: usize) -> LabelSet {
    LabelSet::new(doc.id.clone(), (0..k.min(doc.num_sentences())).collect())
}

/// Scores one selection (index order) against the document's summary.
pub fn score_selection(doc: &Document, selected: &[usize]) -> RougeTriple {
    let cand = doc.selection_tokens(selected);
    let reference = doc.summary_tokens();
    RougeTriple::score(&cand, &reference)
}

/// Mean per-document ROUGE over all documents of the corpus.
pub fn evaluate_labels(corpus: &Corpus, labels: &Labels) -> Result<RougeTriple> {
    evaluate_subset(corpus, |_| true, labels, Execution::default())
}

/// Mean per-document ROUGE over one split. Labels may cover other splits but
/// must only name documents that exist in the corpus.
pub fn evaluate_split(
    corpus: &Corpus,
    split: Split,
    labels: &Labels,
    exec: Execution,
) -> Result<RougeTriple> {
    evaluate_subset(corpus, |d| d.split == split, labels, exec)
}

fn evaluate_subset(
    corpus: &Corpus,
    keep: impl Fn(&Document) -> bool,
    labels: &Labels,
    exec: Execution,
) -> Result<RougeTriple> {
    let ids: std::collections::HashSet<&str> = corpus.documents.iter().map(|d| d.id.as_str()).collect();
    if let Some(unknown) = labels.iter().find(|s| !ids.contains(s.doc_id.as_str())) {
        return Err(Error::UnknownDocument(unknown.doc_id.clone()));
    }
    let docs: Vec<&Document> = corpus.documents.iter().filter(|d| keep(d)).collect();
    let missing: Vec<String> = docs
        .iter()
        .filter(|d| labels.get(&d.id).is_none())
        .map(|d| d.id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingLabels(missing));
    }
    for d in &docs {
        labels.get(&d.id).unwrap().validate(d.num_sentences())?;
    }
    let scores = exec.map(&docs, |d| score_selection(d, &labels.get(&d.id).unwrap().selected));
    let mut mean = RougeMean::default();
    for s in &scores {
        mean.add(s);
    }
    Ok(mean.mean())
}

/// Rounded mean oracle label count, at least 1.
pub fn auto_k(label_counts: impl IntoIterator<Item = usize>) -> usize {
    let (sum, n) = label_counts
        .into_iter()
        .fold((0usize, 0usize), |(s, n), c| (s + c, n + 1));
    if n == 0 {
        return 1;
    }
    ((sum as f64 / n as f64).round() as usize).max(1)
}
