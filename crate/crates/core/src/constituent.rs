//! Constituent factors: positional bins and their distribution distance (PCR),
//! ground-truth pattern tables, per-sentence content value, and content
//! coverage between tables (CCR).

use std::collections::HashMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::baselines::Labels;
use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::textnorm::{sentence_patterns, Pattern};

/// Bin edges `{0, t1, ..., t(K-1), inf}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSet {
    edges: Vec<f64>,
}

impl Default for ThresholdSet {
    fn default() -> Self {
        ThresholdSet {
            edges: vec![0.0, 3.0, 7.0, 15.0, 35.0, f64::INFINITY],
        }
    }
}

impl ThresholdSet {
    pub fn new(edges: Vec<f64>) -> Result<Self> {
        if edges.len() < 3 {
            return Err(Error::InvalidThresholds("need at least two bins".into()));
        }
        if edges[0] != 0.0 {
            return Err(Error::InvalidThresholds("first edge must be 0".into()));
        }
        if edges.last() != Some(&f64::INFINITY) {
            return Err(Error::InvalidThresholds("last edge must be infinite".into()));
        }
        if edges.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidThresholds("edges must be strictly increasing".into()));
        }
        Ok(ThresholdSet { edges })
    }

    /// Finite interior edges, e.g. `"3,7,15,35"`.
    pub fn parse(s: &str) -> Result<Self> {
        let mut edges = vec![0.0];
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let v: f64 = part
                .parse()
                .map_err(|_| Error::InvalidThresholds(format!("bad edge `{part}`")))?;
            edges.push(v);
        }
        edges.push(f64::INFINITY);
        Self::new(edges)
    }

    /// Number of bins K.
    pub fn bins(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }
}

/// Mapped position of sentence `i` in an `n`-sentence document: absolute
/// below the first edge or at/after the last finite edge, otherwise scaled
/// relative position `(i / n) * t(K-1)`.
pub fn position(i: usize, n: usize, th: &ThresholdSet) -> f64 {
    let k = th.bins();
    let first = th.edges[1];
    let last = th.edges[k - 1];
    let x = i as f64;
    if x < first || x >= last {
        x
    } else {
        x / n as f64 * last
    }
}

/// Positional bin in `1..=K`.
pub fn pos_value(i: usize, n: usize, th: &ThresholdSet) -> usize {
    let p = position(i, n, th);
    (1..=th.bins())
        .find(|&k| th.edges[k - 1] <= p && p < th.edges[k])
        .unwrap_or(th.bins())
}

/// Per-bin counts of labeled sentences.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PositionCounts {
    pub counts: Vec<u64>,
}

impl PositionCounts {
    pub fn new(bins: usize) -> Self {
        PositionCounts {
            counts: vec![0; bins],
        }
    }

    pub fn add_sentence(&mut self, i: usize, n: usize, th: &ThresholdSet) {
        self.counts[pos_value(i, n, th) - 1] += 1;
    }

    pub fn add_labels(&mut self, doc: &Document, selected: &[usize], th: &ThresholdSet) {
        let n = doc.num_sentences();
        for &i in selected {
            self.add_sentence(i, n, th);
        }
    }

    pub fn merge(&mut self, other: &PositionCounts) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn distribution(&self) -> Result<PositionalDistribution> {
        let total = self.total();
        if total == 0 {
            return Err(Error::NoLabeledSentences);
        }
        Ok(PositionalDistribution {
            probs: self.counts.iter().map(|&c| c as f64 / total as f64).collect(),
            sentences: total,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionalDistribution {
    pub probs: Vec<f64>,
    pub sentences: u64,
}

impl PositionalDistribution {
    /// From raw probabilities; used for constructed distributions.
    pub fn from_probs(probs: Vec<f64>) -> Self {
        PositionalDistribution { probs, sentences: 0 }
    }

    pub fn bins(&self) -> usize {
        self.probs.len()
    }
}

/// Distribution of labeled sentences over positional bins.
pub fn positional_distribution<'a>(
    docs: impl IntoIterator<Item = &'a Document>,
    labels: &Labels,
    th: &ThresholdSet,
) -> Result<PositionalDistribution> {
    let mut counts = PositionCounts::new(th.bins());
    for d in docs {
        if let Some(set) = labels.get(&d.id) {
            counts.add_labels(d, &set.selected, th);
        }
    }
    counts.distribution()
}

/// Natural-log KL divergence. Terms with `p = 0` contribute nothing; a
/// positive `p` against `q = 0` gives infinity.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(&a, _)| a > 0.0)
        .map(|(&a, &b)| if b > 0.0 { a * (a / b).ln() } else { f64::INFINITY })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PcrParams {
    pub epsilon: f64,
    pub cap: f64,
}

impl Default for PcrParams {
    fn default() -> Self {
        PcrParams {
            epsilon: 1e-4,
            cap: 20.0,
        }
    }
}

fn smooth(p: &[f64], eps: f64) -> Vec<f64> {
    let z: f64 = p.iter().map(|v| v + eps).sum();
    p.iter().map(|v| (v + eps) / z).collect()
}

/// Positional coverage rate `-ln KL(A || B)` over smoothed distributions,
/// capped at `params.cap`.
pub fn pcr(a: &PositionalDistribution, b: &PositionalDistribution, params: PcrParams) -> Result<f64> {
    if a.bins() != b.bins() {
        return Err(Error::InvalidArgument(format!(
            "distributions have {} and {} bins",
            a.bins(),
            b.bins()
        )));
    }
    let kl = kl_divergence(&smooth(&a.probs, params.epsilon), &smooth(&b.probs, params.epsilon));
    debug_assert!(kl >= -1e-12);
    let kl = kl.max(0.0);
    if kl < (-params.cap).exp() {
        return Ok(params.cap);
    }
    Ok(-kl.ln())
}

/// Raw pattern counts over ground-truth sentences.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PatternCounts {
    counts: HashMap<Pattern, u64>,
    total: u64,
}

impl PatternCounts {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, p: Pattern) {
        *self.counts.entry(p).or_insert(0) += 1;
        self.total += 1;
    }

    pub fn add_count(&mut self, p: Pattern, n: u64) {
        if n > 0 {
            *self.counts.entry(p).or_insert(0) += n;
            self.total += n;
        }
    }

    /// Normalizes a raw sentence and counts its patterns.
    pub fn add_sentence<S: AsRef<str>>(&mut self, tokens: &[S]) {
        for p in sentence_patterns(tokens) {
            self.add(p);
        }
    }

    pub fn merge(&mut self, other: PatternCounts) {
        for (p, n) in other.counts {
            self.add_count(p, n);
        }
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn get(&self, p: &Pattern) -> u64 {
        self.counts.get(p).copied().unwrap_or(0)
    }

    /// Patterns of the labeled sentences of one document.
    pub fn of_labeled(doc: &Document, selected: &[usize]) -> PatternCounts {
        let mut c = PatternCounts::new();
        for &i in selected {
            if let Some(s) = doc.sentences.get(i) {
                c.add_sentence(s);
            }
        }
        c
    }

    /// Patterns of the sentences not in `selected`.
    pub fn of_unlabeled(doc: &Document, selected: &[usize]) -> PatternCounts {
        let mut c = PatternCounts::new();
        for (i, s) in doc.sentences.iter().enumerate() {
            if !selected.contains(&i) {
                c.add_sentence(s);
            }
        }
        c
    }
}

/// How the top-M subset of a table is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum TopSelection<'a> {
    /// Highest ground-truth frequency.
    #[default]
    Frequency,
    /// Highest ratio of ground-truth frequency to add-one smoothed frequency
    /// in the given non-ground-truth counts.
    Discriminative(&'a PatternCounts),
}

pub const DEFAULT_TOP_M: usize = 100;

/// Normalized pattern scores with a selected top-M subset.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternTable {
    scores: HashMap<Pattern, f64>,
    top: Vec<(Pattern, f64)>,
    m: usize,
}

fn by_score_then_pattern(a: &(Pattern, f64), b: &(Pattern, f64)) -> std::cmp::Ordering {
    b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0))
}

impl PatternTable {
    pub fn from_counts(counts: &PatternCounts, m: usize) -> Result<Self> {
        Self::with_selection(counts, m, TopSelection::Frequency)
    }

    pub fn with_selection(counts: &PatternCounts, m: usize, sel: TopSelection<'_>) -> Result<Self> {
        if counts.total == 0 {
            return Err(Error::NoPatterns);
        }
        let total = counts.total as f64;
        let rank_key = |p: &Pattern, n: u64| match sel {
            TopSelection::Frequency => n as f64 / total,
            TopSelection::Discriminative(bg) => {
                let denom = (bg.total + bg.distinct() as u64 + 1) as f64;
                (n as f64 / total) / ((bg.get(p) + 1) as f64 / denom)
            }
        };
        let cmp = |a: &(&Pattern, f64), b: &(&Pattern, f64)| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0));
        let mut ranked: Vec<(&Pattern, f64)> = counts.counts.iter().map(|(p, &n)| (p, rank_key(p, n))).collect();
        if m == 0 {
            ranked.clear();
        } else if ranked.len() > m {
            ranked.select_nth_unstable_by(m - 1, cmp);
            ranked.truncate(m);
        }
        ranked.sort_by(cmp);
        let top = ranked
            .iter()
            .map(|(p, _)| ((*p).clone(), counts.counts[*p] as f64 / total))
            .collect();
        let scores: HashMap<Pattern, f64> = counts
            .counts
            .iter()
            .map(|(p, &n)| (p.clone(), n as f64 / total))
            .collect();
        Ok(PatternTable { scores, top, m })
    }

    pub fn score(&self, p: &Pattern) -> f64 {
        self.scores.get(p).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Top-M patterns with raw scores, in selection order.
    pub fn top(&self) -> &[(Pattern, f64)] {
        &self.top
    }

    /// Top-M patterns with scores renormalized to sum to 1 within the set.
    pub fn top_normalized(&self) -> HashMap<&Pattern, f64> {
        let z: f64 = self.top.iter().map(|(_, s)| s).sum();
        self.top.iter().map(|(p, s)| (p, s / z)).collect()
    }

    /// All patterns sorted by score descending then pattern order.
    pub fn sorted(&self) -> Vec<(Pattern, f64)> {
        let mut v: Vec<(Pattern, f64)> = self.scores.iter().map(|(p, &s)| (p.clone(), s)).collect();
        v.sort_by(by_score_then_pattern);
        v
    }

    /// TSV rows: pattern tokens, raw score, top-M flag (1/0).
    pub fn write_tsv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let top: std::collections::HashSet<&Pattern> = self.top.iter().map(|(p, _)| p).collect();
        for (p, s) in self.sorted() {
            writeln!(w, "{}\t{}\t{}", p.tokens().join("\t"), s, u8::from(top.contains(&p)))?;
        }
        Ok(())
    }

    pub fn read_tsv<R: BufRead>(r: R) -> Result<Self> {
        let mut scores = HashMap::new();
        let mut top = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line.map_err(|e| Error::io("<pattern table>", e))?;
            if line.is_empty() {
                continue;
            }
            let bad = |message: &str| Error::Parse {
                path: "<pattern table>".into(),
                line: i + 1,
                message: message.to_string(),
            };
            let fields: Vec<&str> = line.split('\t').collect();
            if !(4..=5).contains(&fields.len()) {
                return Err(bad("expected 2 or 3 pattern tokens, score, flag"));
            }
            let n = fields.len() - 2;
            let p = Pattern::new(fields[..n].iter().copied()).ok_or_else(|| bad("bad pattern"))?;
            let s: f64 = fields[n].parse().map_err(|_| bad("bad score"))?;
            if fields[n + 1] == "1" {
                top.push((p.clone(), s));
            }
            scores.insert(p, s);
        }
        if scores.is_empty() {
            return Err(Error::NoPatterns);
        }
        let m = top.len();
        Ok(PatternTable { scores, top, m })
    }
}

/// Sum of table scores over every pattern occurrence in the normalized
/// sentence, multiplicity included. Uses the full table, not only top-M.
pub fn sentence_cvalue<S: AsRef<str>>(sentence: &[S], table: &PatternTable) -> f64 {
    sentence_patterns(sentence).iter().map(|p| table.score(p)).sum()
}

pub const DEFAULT_CCR_SCALE: f64 = 100.0;

/// Content coverage rate: scaled sum of products of renormalized top-M
/// scores over patterns present in both top sets.
pub fn ccr(a: &PatternTable, b: &PatternTable, scale: f64) -> f64 {
    let na = a.top_normalized();
    let nb = b.top_normalized();
    // iterate in a fixed order so the sum is reproducible
    let sum: f64 = a
        .top
        .iter()
        .filter_map(|(p, _)| nb.get(p).map(|sb| na[p] * sb))
        .fold(0.0, |acc, x| acc + x);
    scale * sum
}
