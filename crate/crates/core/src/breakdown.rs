//! Test-set breakdowns by style or constituent factors, per-bin evaluation of
//! predicted labels, and tag-augmented corpus emission.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::baselines::{score_selection, LabelSet, Labels};
use crate::constituent::{pos_value, sentence_cvalue, PatternTable, ThresholdSet};
use crate::corpus::{parse_record, raw_sentences, tokenize, Document, ParsedLine};
use crate::error::{Error, Result};
use crate::metrics::RougeMean;
use crate::par::Execution;
use crate::style::StyleProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Factor {
    Density,
    Compression,
    #[serde(rename = "pvalue")]
    PValue,
    #[serde(rename = "cvalue")]
    CValue,
}

impl Factor {
    pub fn as_str(self) -> &'static str {
        match self {
            Factor::Density => "density",
            Factor::Compression => "compression",
            Factor::PValue => "pvalue",
            Factor::CValue => "cvalue",
        }
    }

    pub fn granularity(self) -> Granularity {
        match self {
            Factor::Density | Factor::Compression => Granularity::Document,
            Factor::PValue | Factor::CValue => Granularity::Sentence,
        }
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Factor {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "density" => Ok(Factor::Density),
            "compression" => Ok(Factor::Compression),
            "pvalue" | "p-value" => Ok(Factor::PValue),
            "cvalue" | "c-value" => Ok(Factor::CValue),
            _ => Err(format!("unknown factor `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    Document,
    Sentence,
}

/// A binned unit: a document, or one sentence of a document.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Item {
    pub doc_id: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sentence: Option<usize>,
}

impl Item {
    pub fn document(id: impl Into<String>) -> Self {
        Item {
            doc_id: id.into(),
            sentence: None,
        }
    }

    pub fn sentence(id: impl Into<String>, idx: usize) -> Self {
        Item {
            doc_id: id.into(),
            sentence: Some(idx),
        }
    }
}

/// Items with 0-based bin indices, in assignment order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinAssignment {
    pub factor: Factor,
    pub granularity: Granularity,
    pub n_bins: usize,
    pub items: Vec<(Item, usize)>,
}

impl BinAssignment {
    pub fn label(&self, bin: usize) -> String {
        bin_label(self.factor, self.n_bins, bin)
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.n_bins];
        for (_, b) in &self.items {
            s[*b] += 1;
        }
        s
    }

    /// Tab-separated `doc_id, sentence, bin` lines.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (item, b) in &self.items {
            let sent = item.sentence.map(|s| s.to_string()).unwrap_or_default();
            out.push_str(&format!("{}\t{}\t{}\n", item.doc_id, sent, self.label(*b)));
        }
        out
    }
}

pub fn bin_label(factor: Factor, n_bins: usize, bin: usize) -> String {
    match factor {
        Factor::Density | Factor::Compression if n_bins == 3 => ["low", "medium", "high"][bin].to_string(),
        Factor::PValue => format!("P{}", bin + 1),
        Factor::CValue => format!("C{}", bin + 1),
        _ => format!("B{}", bin + 1),
    }
}

/// Sorts ascending by value (ties by item) and cuts into `n_bins`
/// equal-count bins; the remainder goes to the lowest bins.
pub fn quantile_bins(mut values: Vec<(Item, f64)>, n_bins: usize) -> Result<Vec<(Item, usize)>> {
    if n_bins == 0 || values.len() < n_bins {
        return Err(Error::TooFewItems {
            items: values.len(),
            bins: n_bins,
        });
    }
    values.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    let base = values.len() / n_bins;
    let rem = values.len() % n_bins;
    let mut out = Vec::with_capacity(values.len());
    let mut iter = values.into_iter();
    for bin in 0..n_bins {
        let size = base + usize::from(bin < rem);
        out.extend(iter.by_ref().take(size).map(|(item, _)| (item, bin)));
    }
    Ok(out)
}

/// Document terciles (or `n_bins` quantiles) by a style factor. Pass every
/// split so bins are cut over the whole dataset.
pub fn bin_by_style(docs: &[&Document], factor: Factor, n_bins: usize, exec: Execution) -> Result<BinAssignment> {
    let value = match factor {
        Factor::Density => |p: &StyleProfile| p.density,
        Factor::Compression => |p: &StyleProfile| p.compression,
        _ => {
            return Err(Error::InvalidArgument(format!(
                "{factor} is not a style factor"
            )))
        }
    };
    let profiles = exec.map(docs, |d| StyleProfile::of(d));
    let mut values = Vec::with_capacity(docs.len());
    for (d, p) in docs.iter().zip(profiles) {
        values.push((Item::document(d.id.clone()), value(&p?)));
    }
    Ok(BinAssignment {
        factor,
        granularity: Granularity::Document,
        n_bins,
        items: quantile_bins(values, n_bins)?,
    })
}

fn ground_truth<'a>(docs: &'a [&'a Document], oracle: &'a Labels) -> Result<Vec<(&'a Document, usize)>> {
    let mut out = Vec::new();
    let mut missing = Vec::new();
    for d in docs {
        match oracle.get(&d.id) {
            Some(set) => out.extend(set.sorted().into_iter().filter(|&i| i < d.num_sentences()).map(|i| (*d, i))),
            None => missing.push(d.id.clone()),
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingLabels(missing));
    }
    Ok(out)
}

/// Ground-truth sentences in equal-count bins by content value.
pub fn bin_by_cvalue(
    docs: &[&Document],
    oracle: &Labels,
    table: &PatternTable,
    n_bins: usize,
    exec: Execution,
) -> Result<BinAssignment> {
    let gt = ground_truth(docs, oracle)?;
    if gt.is_empty() {
        return Err(Error::NoLabeledSentences);
    }
    let scores = exec.map(&gt, |(d, i)| sentence_cvalue(&d.sentences[*i], table));
    let values = gt
        .iter()
        .zip(scores)
        .map(|((d, i), s)| (Item::sentence(d.id.clone(), *i), s))
        .collect();
    Ok(BinAssignment {
        factor: Factor::CValue,
        granularity: Granularity::Sentence,
        n_bins,
        items: quantile_bins(values, n_bins)?,
    })
}

/// Ground-truth sentences binned by positional value (bins may be unequal).
pub fn bin_by_pvalue(docs: &[&Document], oracle: &Labels, th: &ThresholdSet) -> Result<BinAssignment> {
    let gt = ground_truth(docs, oracle)?;
    let items = gt
        .iter()
        .map(|(d, i)| (Item::sentence(d.id.clone(), *i), pos_value(*i, d.num_sentences(), th) - 1))
        .collect();
    Ok(BinAssignment {
        factor: Factor::PValue,
        granularity: Granularity::Sentence,
        n_bins: th.bins(),
        items,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Averaging {
    /// Pooled over all items of a bin.
    #[default]
    Micro,
    /// Per-document ratios averaged within a bin.
    Macro,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakdownRow {
    pub bin: String,
    pub count: usize,
    pub accuracy: Option<f64>,
    pub f1: Option<f64>,
    /// Mean ROUGE f1 in percent; document bins only.
    pub r1: Option<f64>,
    pub r2: Option<f64>,
    pub rl: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakdownReport {
    pub factor: Factor,
    pub granularity: Granularity,
    pub averaging: Averaging,
    pub rows: Vec<BreakdownRow>,
}

impl BreakdownReport {
    pub fn total(&self) -> usize {
        self.rows.iter().map(|r| r.count).sum()
    }
}

/// Label-set F1 between predicted and oracle indices. Two empty sets agree
/// perfectly.
pub fn label_f1(predicted: &LabelSet, oracle: &LabelSet) -> f64 {
    let p: HashSet<usize> = predicted.selected.iter().copied().collect();
    let o: HashSet<usize> = oracle.selected.iter().copied().collect();
    if p.is_empty() && o.is_empty() {
        return 1.0;
    }
    let hit = p.intersection(&o).count() as f64;
    if hit == 0.0 {
        return 0.0;
    }
    let (prec, rec) = (hit / p.len() as f64, hit / o.len() as f64);
    2.0 * prec * rec / (prec + rec)
}

#[derive(Default)]
struct Ratio {
    num: f64,
    den: f64,
}

impl Ratio {
    fn get(&self) -> Option<f64> {
        (self.den > 0.0).then(|| self.num / self.den)
    }
}

/// Evaluates predictions per bin. Only items whose document is in `docs`
/// are counted, so bins cut over all splits can be evaluated on test only.
pub fn breakdown_eval(
    predictions: &Labels,
    oracle: &Labels,
    bins: &BinAssignment,
    docs: &[&Document],
    averaging: Averaging,
    exec: Execution,
) -> Result<BreakdownReport> {
    let by_id: HashMap<&str, &Document> = docs.iter().map(|d| (d.id.as_str(), *d)).collect();
    let items: Vec<&(Item, usize)> = bins
        .items
        .iter()
        .filter(|(it, _)| by_id.contains_key(it.doc_id.as_str()))
        .collect();

    let mut seen = HashSet::new();
    let mut missing_pred = Vec::new();
    let mut missing_oracle = Vec::new();
    for (it, _) in &items {
        if seen.insert(it.doc_id.as_str()) {
            if predictions.get(&it.doc_id).is_none() {
                missing_pred.push(it.doc_id.clone());
            }
            if oracle.get(&it.doc_id).is_none() {
                missing_oracle.push(it.doc_id.clone());
            }
        }
    }
    if !missing_pred.is_empty() {
        return Err(Error::MissingLabels(missing_pred));
    }
    if !missing_oracle.is_empty() {
        return Err(Error::MissingLabels(missing_oracle));
    }

    let rows = match bins.granularity {
        Granularity::Sentence => sentence_rows(predictions, bins, &items, averaging),
        Granularity::Document => document_rows(predictions, oracle, bins, &items, &by_id, averaging, exec)?,
    };
    Ok(BreakdownReport {
        factor: bins.factor,
        granularity: bins.granularity,
        averaging,
        rows,
    })
}

fn sentence_rows(
    predictions: &Labels,
    bins: &BinAssignment,
    items: &[&(Item, usize)],
    averaging: Averaging,
) -> Vec<BreakdownRow> {
    let mut counts = vec![0usize; bins.n_bins];
    let mut micro: Vec<Ratio> = (0..bins.n_bins).map(|_| Ratio::default()).collect();
    // per bin: doc -> (hits, total), in first-seen order
    let mut per_doc: Vec<Vec<(String, f64, f64)>> = vec![Vec::new(); bins.n_bins];
    for (it, b) in items {
        let hit = it
            .sentence
            .is_some_and(|s| predictions.get(&it.doc_id).is_some_and(|p| p.contains(s)));
        let h = f64::from(u8::from(hit));
        counts[*b] += 1;
        micro[*b].num += h;
        micro[*b].den += 1.0;
        match per_doc[*b].last_mut() {
            Some((id, num, den)) if *id == it.doc_id => {
                *num += h;
                *den += 1.0;
            }
            _ => per_doc[*b].push((it.doc_id.clone(), h, 1.0)),
        }
    }
    (0..bins.n_bins)
        .map(|b| {
            let accuracy = match averaging {
                Averaging::Micro => micro[b].get(),
                Averaging::Macro => {
                    // merge runs of the same document that were not adjacent
                    let mut merged: Vec<(String, f64, f64)> = Vec::new();
                    let mut index: HashMap<String, usize> = HashMap::new();
                    for (id, n, d) in &per_doc[b] {
                        match index.get(id) {
                            Some(&i) => {
                                merged[i].1 += n;
                                merged[i].2 += d;
                            }
                            None => {
                                index.insert(id.clone(), merged.len());
                                merged.push((id.clone(), *n, *d));
                            }
                        }
                    }
                    let r = Ratio {
                        num: merged.iter().map(|(_, n, d)| n / d).sum(),
                        den: merged.len() as f64,
                    };
                    r.get()
                }
            };
            BreakdownRow {
                bin: bins.label(b),
                count: counts[b],
                accuracy,
                f1: None,
                r1: None,
                r2: None,
                rl: None,
            }
        })
        .collect()
}

fn document_rows(
    predictions: &Labels,
    oracle: &Labels,
    bins: &BinAssignment,
    items: &[&(Item, usize)],
    by_id: &HashMap<&str, &Document>,
    averaging: Averaging,
    exec: Execution,
) -> Result<Vec<BreakdownRow>> {
    struct DocEval {
        hits: f64,
        gold: f64,
        f1: f64,
        rouge: crate::metrics::RougeTriple,
    }
    let evals: Vec<Result<DocEval>> = exec.map(items, |(it, _)| {
        let d = by_id[it.doc_id.as_str()];
        let pred = predictions.get(&d.id).unwrap();
        let gold = oracle.get(&d.id).unwrap();
        pred.validate(d.num_sentences())?;
        let hits = gold.selected.iter().filter(|&&i| pred.contains(i)).count();
        Ok(DocEval {
            hits: hits as f64,
            gold: gold.len() as f64,
            f1: label_f1(pred, gold),
            rouge: score_selection(d, &pred.selected),
        })
    });
    let mut counts = vec![0usize; bins.n_bins];
    let mut acc: Vec<Ratio> = (0..bins.n_bins).map(|_| Ratio::default()).collect();
    let mut f1: Vec<Ratio> = (0..bins.n_bins).map(|_| Ratio::default()).collect();
    let mut rouge = vec![RougeMean::default(); bins.n_bins];
    for ((_, b), e) in items.iter().zip(evals) {
        let e = e?;
        counts[*b] += 1;
        match averaging {
            Averaging::Micro => {
                acc[*b].num += e.hits;
                acc[*b].den += e.gold;
            }
            Averaging::Macro if e.gold > 0.0 => {
                acc[*b].num += e.hits / e.gold;
                acc[*b].den += 1.0;
            }
            Averaging::Macro => {}
        }
        f1[*b].num += e.f1;
        f1[*b].den += 1.0;
        rouge[*b].add(&e.rouge);
    }
    Ok((0..bins.n_bins)
        .map(|b| {
            let has = counts[b] > 0;
            let m = rouge[b].mean().scaled(100.0);
            BreakdownRow {
                bin: bins.label(b),
                count: counts[b],
                accuracy: acc[b].get(),
                f1: f1[b].get(),
                r1: has.then_some(m.r1.f1),
                r2: has.then_some(m.r2.f1),
                rl: has.then_some(m.rl.f1),
            }
        })
        .collect())
}

/// Equal-count content-value bins fitted on reference scores, applicable to
/// any sentence.
#[derive(Debug, Clone, PartialEq)]
pub struct CValueBins {
    pub table: PatternTable,
    /// Upper edge of each bin except the last.
    pub cuts: Vec<f64>,
}

impl CValueBins {
    pub fn fit(table: PatternTable, reference_scores: &[f64], n_bins: usize) -> Result<Self> {
        if n_bins == 0 || reference_scores.len() < n_bins {
            return Err(Error::TooFewItems {
                items: reference_scores.len(),
                bins: n_bins,
            });
        }
        let mut s = reference_scores.to_vec();
        s.sort_by(f64::total_cmp);
        let base = s.len() / n_bins;
        let rem = s.len() % n_bins;
        let mut end = 0;
        let mut cuts = Vec::with_capacity(n_bins - 1);
        for bin in 0..n_bins - 1 {
            end += base + usize::from(bin < rem);
            cuts.push(s[end - 1]);
        }
        Ok(CValueBins { table, cuts })
    }

    /// 1-based bin of a raw sentence.
    pub fn bin<S: AsRef<str>>(&self, sentence: &[S]) -> usize {
        let v = sentence_cvalue(sentence, &self.table);
        1 + self.cuts.iter().filter(|&&c| v > c).count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum TagScheme {
    /// One of `tags` pseudo-domain tags per document, from a seeded stream.
    Random { tags: usize, seed: u64 },
    Domain,
    PValue,
    CValue,
    /// Positional and content bin pair per sentence.
    PC,
}

pub struct TagContext<'a> {
    pub thresholds: &'a ThresholdSet,
    pub cvalue: Option<&'a CValueBins>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TagSummary {
    pub written: usize,
    pub skipped: usize,
    /// Distinct document-level tags in first-seen order.
    pub tags: Vec<String>,
}

/// Streams `input` and writes each record with `tag` (document schemes) or
/// `sentence_tags` (sentence schemes) added. Records are rewritten with the
/// article as a `sentences` array aligned with `sentence_tags`; existing tag
/// fields are replaced, so tagging is idempotent. Skipped records (empty text
/// or summary) are dropped.
pub fn emit_tags<W: Write>(input: &Path, scheme: &TagScheme, ctx: &TagContext<'_>, mut out: W) -> Result<TagSummary> {
    let needs_cvalue = matches!(scheme, TagScheme::CValue | TagScheme::PC);
    let cv = match (needs_cvalue, ctx.cvalue) {
        (true, None) => {
            return Err(Error::InvalidArgument(
                "content-value tags need a pattern table".into(),
            ))
        }
        (_, c) => c,
    };
    if let TagScheme::Random { tags: 0, .. } = scheme {
        return Err(Error::InvalidArgument("random scheme needs at least one tag".into()));
    }
    let mut rng = match scheme {
        TagScheme::Random { seed, .. } => Some(ChaCha8Rng::seed_from_u64(*seed)),
        _ => None,
    };
    let file = File::open(input).map_err(|e| Error::io(input, e))?;
    let mut summary = TagSummary::default();
    let mut seen_ids = HashSet::new();
    let io_err = |e: std::io::Error| Error::io("<tag output>", e);
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(input, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: input.to_path_buf(),
            line: i + 1,
            message,
        };
        let doc = match parse_record(&line).map_err(parse_err)? {
            ParsedLine::Document(d) => d,
            ParsedLine::Skipped { .. } => {
                summary.skipped += 1;
                continue;
            }
        };
        if !seen_ids.insert(doc.id.clone()) {
            return Err(Error::DuplicateId {
                path: input.to_path_buf(),
                line: i + 1,
                id: doc.id,
            });
        }
        let mut rec: Map<String, Value> = serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
        let given: Option<Vec<String>> = rec
            .get("sentences")
            .and_then(|v| serde_json::from_value(v.clone()).ok());
        let text = rec.get("text").and_then(Value::as_str);
        let sentences: Vec<String> = raw_sentences(given.as_deref(), text)
            .unwrap_or_default()
            .into_iter()
            .filter(|s| !tokenize(s).is_empty())
            .collect();
        debug_assert_eq!(sentences.len(), doc.num_sentences());
        rec.insert("sentences".into(), Value::from(sentences));
        rec.remove("tag");
        rec.remove("sentence_tags");

        let n = doc.num_sentences();
        match scheme {
            TagScheme::Random { tags, .. } => {
                let k = rng.as_mut().unwrap().gen_range(0..*tags);
                set_doc_tag(&mut rec, &mut summary, format!("R{}", k + 1));
            }
            TagScheme::Domain => {
                let domain = doc.domain.clone().ok_or_else(|| Error::MissingDomain(doc.id.clone()))?;
                set_doc_tag(&mut rec, &mut summary, domain);
            }
            TagScheme::PValue => {
                let tags: Vec<String> = (0..n).map(|i| format!("P{}", pos_value(i, n, ctx.thresholds))).collect();
                rec.insert("sentence_tags".into(), Value::from(tags));
            }
            TagScheme::CValue => {
                let cv = cv.unwrap();
                let tags: Vec<String> = doc.sentences.iter().map(|s| format!("C{}", cv.bin(s))).collect();
                rec.insert("sentence_tags".into(), Value::from(tags));
            }
            TagScheme::PC => {
                let cv = cv.unwrap();
                let tags: Vec<String> = doc
                    .sentences
                    .iter()
                    .enumerate()
                    .map(|(i, s)| format!("P{}C{}", pos_value(i, n, ctx.thresholds), cv.bin(s)))
                    .collect();
                rec.insert("sentence_tags".into(), Value::from(tags));
            }
        }
        serde_json::to_writer(&mut out, &rec).map_err(|e| io_err(e.into()))?;
        out.write_all(b"\n").map_err(io_err)?;
        summary.written += 1;
    }
    out.flush().map_err(io_err)?;
    Ok(summary)
}

fn set_doc_tag(rec: &mut Map<String, Value>, summary: &mut TagSummary, tag: String) {
    if !summary.tags.contains(&tag) {
        summary.tags.push(tag.clone());
    }
    rec.insert("tag".into(), Value::from(tag));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constituent::PatternCounts;
    use crate::corpus::Split;
    use approx::assert_abs_diff_eq;

    fn values(xs: &[f64]) -> Vec<(Item, f64)> {
        xs.iter()
            .enumerate()
            .map(|(i, &v)| (Item::document(format!("d{i:02}")), v))
            .collect()
    }

    fn bins_of(assign: &[(Item, usize)]) -> Vec<Vec<String>> {
        let n = assign.iter().map(|(_, b)| b + 1).max().unwrap_or(0);
        let mut out = vec![Vec::new(); n];
        for (it, b) in assign {
            out[*b].push(it.doc_id.clone());
        }
        out
    }

    #[test]
    fn terciles_of_nine() {
        let v = values(&[9.0, 8.0, 7.0, 6.0, 5.0, 4.0, 3.0, 2.0, 1.0]);
        let b = bins_of(&quantile_bins(v, 3).unwrap());
        assert_eq!(b[0], ["d08", "d07", "d06"]);
        assert_eq!(b[1], ["d05", "d04", "d03"]);
        assert_eq!(b[2], ["d02", "d01", "d00"]);
    }

    #[test]
    fn ties_follow_id_order_and_remainder_goes_low() {
        let b = bins_of(&quantile_bins(values(&[1.0; 9]), 3).unwrap());
        assert_eq!(b[0], ["d00", "d01", "d02"]);
        let sizes: Vec<usize> = bins_of(&quantile_bins(values(&[0.5; 10]), 3).unwrap())
            .iter()
            .map(Vec::len)
            .collect();
        assert_eq!(sizes, [4, 3, 3]);
        assert!(matches!(quantile_bins(values(&[1.0, 2.0]), 3), Err(Error::TooFewItems { items: 2, bins: 3 })));
    }

    fn doc(id: &str, n: usize, summary: &[&str]) -> Document {
        Document {
            id: id.into(),
            domain: Some(if id.starts_with('c') { "cnn" } else { "dailymail" }.into()),
            split: Split::Test,
            sentences: (0..n).map(|i| vec![format!("{id}w{i}"), format!("x{i}")]).collect(),
            summary: vec![summary.iter().map(|s| s.to_string()).collect()],
        }
    }

    #[test]
    fn labels_and_pvalue_bins() {
        assert_eq!(bin_label(Factor::Density, 3, 2), "high");
        assert_eq!(bin_label(Factor::Compression, 4, 0), "B1");
        let d = doc("a", 60, &["x"]);
        let docs = [&d];
        let oracle: Labels = [LabelSet::new("a", vec![40, 0])].into_iter().collect();
        let b = bin_by_pvalue(&docs, &oracle, &ThresholdSet::default()).unwrap();
        assert_eq!(b.items[0], (Item::sentence("a", 0), 0));
        assert_eq!(b.items[1], (Item::sentence("a", 40), 4));
        assert_eq!(b.sizes(), [1, 0, 0, 0, 1]);
        assert_eq!(b.label(4), "P5");
    }

    #[test]
    fn accuracy_counts_ground_truth_hits() {
        let d = doc("a", 10, &["x"]);
        let docs = [&d];
        let oracle: Labels = [LabelSet::new("a", vec![0, 1, 2, 3])].into_iter().collect();
        let pred: Labels = [LabelSet::new("a", vec![0, 1, 2, 9])].into_iter().collect();
        // force all four ground-truth sentences into one bin
        let bins = BinAssignment {
            factor: Factor::PValue,
            granularity: Granularity::Sentence,
            n_bins: 1,
            items: (0..4).map(|i| (Item::sentence("a", i), 0)).collect(),
        };
        let r = breakdown_eval(&pred, &oracle, &bins, &docs, Averaging::Micro, Execution::Sequential).unwrap();
        assert_abs_diff_eq!(r.rows[0].accuracy.unwrap(), 0.75);
        assert_eq!(r.total(), 4);

        let missing = Labels::new();
        match breakdown_eval(&missing, &oracle, &bins, &docs, Averaging::Micro, Execution::Sequential) {
            Err(Error::MissingLabels(ids)) => assert_eq!(ids, ["a"]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn macro_and_micro_differ() {
        let a = doc("a", 10, &["x"]);
        let b = doc("b", 10, &["x"]);
        let docs = [&a, &b];
        let oracle: Labels = [LabelSet::new("a", vec![0, 1, 2]), LabelSet::new("b", vec![0])]
            .into_iter()
            .collect();
        let pred: Labels = [LabelSet::new("a", vec![]), LabelSet::new("b", vec![0])]
            .into_iter()
            .collect();
        let bins = BinAssignment {
            factor: Factor::PValue,
            granularity: Granularity::Sentence,
            n_bins: 1,
            items: vec![
                (Item::sentence("a", 0), 0),
                (Item::sentence("b", 0), 0),
                (Item::sentence("a", 1), 0),
                (Item::sentence("a", 2), 0),
            ],
        };
        let micro = breakdown_eval(&pred, &oracle, &bins, &docs, Averaging::Micro, Execution::Sequential).unwrap();
        let mac = breakdown_eval(&pred, &oracle, &bins, &docs, Averaging::Macro, Execution::Sequential).unwrap();
        assert_abs_diff_eq!(micro.rows[0].accuracy.unwrap(), 0.25);
        assert_abs_diff_eq!(mac.rows[0].accuracy.unwrap(), 0.5);
    }

    #[test]
    fn document_bins_report_f1_and_rouge() {
        let docs_owned: Vec<Document> = (0..6).map(|i| doc(&format!("d{i}"), 4, &[&format!("d{i}w0"), "x0"])).collect();
        let docs: Vec<&Document> = docs_owned.iter().collect();
        let oracle: Labels = docs.iter().map(|d| LabelSet::new(d.id.clone(), vec![0])).collect();
        let bins = bin_by_style(&docs, Factor::Density, 3, Execution::Parallel).unwrap();
        let r = breakdown_eval(&oracle, &oracle, &bins, &docs, Averaging::Micro, Execution::Parallel).unwrap();
        assert_eq!(r.rows.len(), 3);
        for row in &r.rows {
            assert_eq!(row.count, 2);
            assert_eq!(row.accuracy, Some(1.0));
            assert_eq!(row.f1, Some(1.0));
            assert_abs_diff_eq!(row.r1.unwrap(), 100.0);
        }
        // evaluating a subset only counts its documents
        let r = breakdown_eval(&oracle, &oracle, &bins, &docs[..3], Averaging::Micro, Execution::Sequential).unwrap();
        assert_eq!(r.total(), 3);
    }

    #[test]
    fn label_f1_cases() {
        let s = |v: Vec<usize>| LabelSet::new("a", v);
        assert_eq!(label_f1(&s(vec![]), &s(vec![])), 1.0);
        assert_eq!(label_f1(&s(vec![1]), &s(vec![])), 0.0);
        assert_abs_diff_eq!(label_f1(&s(vec![0, 1]), &s(vec![1, 2])), 0.5);
    }

    #[test]
    fn cvalue_bins_fit() {
        let mut c = PatternCounts::new();
        c.add_sentence(&["red", "fox"]);
        let t = PatternTable::from_counts(&c, 10).unwrap();
        let cv = CValueBins::fit(t, &[0.0, 0.0, 1.0, 2.0, 3.0], 5).unwrap();
        assert_eq!(cv.cuts, vec![0.0, 0.0, 1.0, 2.0]);
        assert_eq!(cv.bin(&["nothing"]), 1);
        assert_eq!(cv.bin(&["red", "fox"]), 3);
        assert!(CValueBins::fit(cv.table.clone(), &[1.0], 5).is_err());
    }

    fn corpus_file(lines: &[&str]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        for l in lines {
            writeln!(f, "{l}").unwrap();
        }
        f
    }

    fn run(input: &Path, scheme: &TagScheme, cv: Option<&CValueBins>) -> Result<(String, TagSummary)> {
        let th = ThresholdSet::default();
        let ctx = TagContext {
            thresholds: &th,
            cvalue: cv,
        };
        let mut out = Vec::new();
        let s = emit_tags(input, scheme, &ctx, &mut out)?;
        Ok((String::from_utf8(out).unwrap(), s))
    }

    #[test]
    fn tag_schemes() {
        let f = corpus_file(&[
            r#"{"id":"a","split":"train","domain":"cnn","text":"Red fox ran. Blue sky!","summary":"Red fox."}"#,
            r#"{"id":"b","split":"test","domain":"dailymail","sentences":["One red fox.","..."],"summary":["x"]}"#,
            r#"{"id":"c","split":"test","text":"","summary":"x"}"#,
        ]);
        let (out, s) = run(f.path(), &TagScheme::Domain, None).unwrap();
        assert_eq!(s.tags, ["cnn", "dailymail"]);
        assert_eq!(s.written, 2);
        assert_eq!(s.skipped, 1);
        let first: Value = serde_json::from_str(out.lines().next().unwrap()).unwrap();
        assert_eq!(first["tag"], "cnn");
        assert_eq!(first["sentences"], serde_json::json!(["Red fox ran.", "Blue sky!"]));

        let (out, _) = run(f.path(), &TagScheme::PValue, None).unwrap();
        let second: Value = serde_json::from_str(out.lines().nth(1).unwrap()).unwrap();
        assert_eq!(second["sentence_tags"], serde_json::json!(["P1", "P1"]));

        let random = TagScheme::Random { tags: 2, seed: 7 };
        assert_eq!(run(f.path(), &random, None).unwrap().0, run(f.path(), &random, None).unwrap().0);

        assert!(run(f.path(), &TagScheme::CValue, None).is_err());
        let mut c = PatternCounts::new();
        c.add_sentence(&["red", "fox"]);
        let cv = CValueBins::fit(PatternTable::from_counts(&c, 10).unwrap(), &[0.0, 1.0], 2).unwrap();
        let (out, _) = run(f.path(), &TagScheme::PC, Some(&cv)).unwrap();
        let first: Value = serde_json::from_str(out.lines().next().unwrap()).unwrap();
        assert_eq!(first["sentence_tags"], serde_json::json!(["P1C2", "P1C1"]));
    }

    #[test]
    fn tagging_is_idempotent() {
        let f = corpus_file(&[
            r#"{"id":"a","split":"train","domain":"cnn","text":"Red fox ran. Blue sky!","summary":"Red fox."}"#,
            r#"{"id":"b","split":"test","domain":"dm","sentences":["One.","Two."],"summary":["x"]}"#,
        ]);
        let scheme = TagScheme::Random { tags: 3, seed: 11 };
        let (once, _) = run(f.path(), &scheme, None).unwrap();
        let g = corpus_file(&once.lines().collect::<Vec<_>>());
        let (twice, _) = run(g.path(), &scheme, None).unwrap();
        assert_eq!(once, twice);
        // switching scheme drops the stale document tag
        let (p, _) = run(g.path(), &TagScheme::PValue, None).unwrap();
        assert!(!p.contains("\"tag\""));
    }

    #[test]
    fn domain_scheme_requires_domain() {
        let f = corpus_file(&[r#"{"id":"a","split":"train","text":"A b.","summary":"A."}"#]);
        assert!(matches!(run(f.path(), &TagScheme::Domain, None), Err(Error::MissingDomain(id)) if id == "a"));
    }
}
