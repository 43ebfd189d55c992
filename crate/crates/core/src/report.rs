//! Dataset statistics, cross-dataset shift matrices, oracle label caching
//! and table emission (TSV and JSON).

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::baselines::{auto_k, greedy_oracle, lead_k, oracle_labels, score_selection, LabelSet, Labels};
use crate::breakdown::{BinAssignment, BreakdownReport};
use crate::constituent::{
    ccr, pcr, PatternCounts, PatternTable, PcrParams, PositionCounts, ThresholdSet, TopSelection, DEFAULT_CCR_SCALE,
    DEFAULT_TOP_M,
};
use crate::corpus::{Corpus, Document, DocumentStream, Split, SplitCounts, STREAM_BATCH};
use crate::error::{Error, Result};
use crate::metrics::{RougeMean, RougeTriple};
use crate::par::Execution;
use crate::style::{salience_concentration, ConcentrationMean, SalienceDenominator, StyleProfile};

/// Lead-k values evaluated in the first statistics pass when k is automatic.
pub const LEAD_SWEEP: usize = 8;

/// ROUGE f1 values in percent.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RougeF1 {
    pub r1: f64,
    pub r2: f64,
    pub rl: f64,
}

impl RougeF1 {
    pub fn percent(t: &RougeTriple) -> Self {
        RougeF1 {
            r1: 100.0 * t.r1.f1,
            r2: 100.0 * t.r2.f1,
            rl: 100.0 * t.rl.f1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MeanMedian {
    pub mean: f64,
    pub median: f64,
}

impl MeanMedian {
    pub fn of(mut values: Vec<f64>) -> Self {
        if values.is_empty() {
            return MeanMedian::default();
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        values.sort_by(f64::total_cmp);
        let mid = values.len() / 2;
        let median = if values.len() % 2 == 0 {
            (values[mid - 1] + values[mid]) / 2.0
        } else {
            values[mid]
        };
        MeanMedian { mean, median }
    }
}

/// One row of the dataset statistics table. Style factors cover every split;
/// ROUGE and label counts cover the test split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub name: String,
    pub train: usize,
    pub valid: usize,
    pub test: usize,
    pub skipped: usize,
    pub density: MeanMedian,
    pub compression: MeanMedian,
    pub lead_k: usize,
    pub lead: RougeF1,
    pub oracle: RougeF1,
    pub oracle_mean_labels: f64,
    pub auto_k: usize,
}

#[derive(Debug, Clone)]
pub struct ScanOptions {
    pub exec: Execution,
    pub max_sentences: Option<usize>,
    /// Directory for cached oracle label files; `None` disables caching.
    pub cache_dir: Option<PathBuf>,
    pub batch: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            exec: Execution::default(),
            max_sentences: None,
            cache_dir: None,
            batch: STREAM_BATCH,
        }
    }
}

/// Hex SHA-256 of a file's bytes.
pub fn file_digest(path: &Path) -> Result<String> {
    let mut f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(hex::encode(h.finalize()))
}

/// Cache file for oracle labels of `splits` of the corpus at `path`, keyed
/// by content hash, split set and selection cap.
pub fn oracle_cache_path(dir: &Path, path: &Path, splits: &[Split], max_sentences: Option<usize>) -> Result<PathBuf> {
    let mut key = Sha256::new();
    key.update(file_digest(path)?.as_bytes());
    for s in splits {
        key.update(b"|");
        key.update(s.as_str().as_bytes());
    }
    key.update(format!("|max={max_sentences:?}").as_bytes());
    Ok(dir.join(format!("{}.oracle.jsonl", hex::encode(key.finalize()))))
}

fn write_atomically(target: &Path, labels: &Labels) -> Result<()> {
    if let Some(dir) = target.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let tmp = target.with_extension("tmp");
    labels.write_file(&tmp)?;
    fs::rename(&tmp, target).map_err(|e| Error::io(target, e))
}

/// Oracle labels for the documents of `splits` in an in-memory corpus loaded
/// from `path`, read from or written to the cache when one is configured.
pub fn corpus_oracle(path: &Path, corpus: &Corpus, splits: &[Split], opts: &ScanOptions) -> Result<Labels> {
    let cache = match &opts.cache_dir {
        Some(dir) => Some(oracle_cache_path(dir, path, splits, opts.max_sentences)?),
        None => None,
    };
    if let Some(c) = cache.as_ref().filter(|c| c.exists()) {
        log::debug!("oracle cache hit: {}", c.display());
        return Labels::read_jsonl(c);
    }
    let docs: Vec<&Document> = corpus.documents.iter().filter(|d| splits.contains(&d.split)).collect();
    let labels = oracle_labels(&docs, opts.max_sentences, opts.exec);
    if let Some(c) = cache {
        write_atomically(&c, &labels)?;
    }
    Ok(labels)
}

/// Per-scan bookkeeping.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScanInfo {
    pub counts: SplitCounts,
    pub skipped: usize,
}

/// Streams a corpus in batches, handing each batch to `visit` together with
/// oracle labels for documents in `splits` (`None` elsewhere). Labels come
/// from the cache when present and are written to it otherwise.
pub fn scan_with_oracle<F>(path: &Path, splits: &[Split], opts: &ScanOptions, mut visit: F) -> Result<ScanInfo>
where
    F: FnMut(&[Document], &[Option<LabelSet>]) -> Result<()>,
{
    let cache_path = match &opts.cache_dir {
        Some(dir) => Some(oracle_cache_path(dir, path, splits, opts.max_sentences)?),
        None => None,
    };
    let cached = match cache_path.as_ref().filter(|c| c.exists()) {
        Some(c) => Some(Labels::read_jsonl(c)?),
        None => None,
    };
    let mut writer = match (&cache_path, &cached) {
        (Some(c), None) => {
            if let Some(dir) = c.parent() {
                fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            }
            let tmp = c.with_extension("tmp");
            let f = File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
            Some((tmp, BufWriter::new(f)))
        }
        _ => None,
    };

    let mut info = ScanInfo::default();
    let mut stream = DocumentStream::open(path, opts.exec)?.with_batch_size(opts.batch);
    while let Some(batch) = stream.next_batch()? {
        let wanted: Vec<&Document> = batch.iter().filter(|d| splits.contains(&d.split)).collect();
        let computed: Vec<LabelSet> = match &cached {
            Some(c) => {
                let missing: Vec<String> = wanted
                    .iter()
                    .filter(|d| c.get(&d.id).is_none())
                    .map(|d| d.id.clone())
                    .collect();
                if !missing.is_empty() {
                    return Err(Error::MissingLabels(missing));
                }
                wanted.iter().map(|d| c.get(&d.id).unwrap().clone()).collect()
            }
            None => opts.exec.map(&wanted, |d| greedy_oracle(d, opts.max_sentences)),
        };
        if let Some((tmp, w)) = writer.as_mut() {
            for set in &computed {
                serde_json::to_writer(&mut *w, set)
                    .map_err(std::io::Error::from)
                    .and_then(|_| w.write_all(b"\n"))
                    .map_err(|e| Error::io(&*tmp, e))?;
            }
        }
        let mut computed = computed.into_iter();
        let labels: Vec<Option<LabelSet>> = batch
            .iter()
            .map(|d| splits.contains(&d.split).then(|| computed.next().unwrap()))
            .collect();
        for d in &batch {
            info.counts.add(d.split);
        }
        visit(&batch, &labels)?;
    }
    info.skipped = stream.skipped().len();
    if let (Some((tmp, mut w)), Some(target)) = (writer, cache_path) {
        w.flush().map_err(|e| Error::io(&tmp, e))?;
        drop(w);
        fs::rename(&tmp, &target).map_err(|e| Error::io(&target, e))?;
    }
    Ok(info)
}

struct TestEval {
    oracle: RougeTriple,
    leads: Vec<RougeTriple>,
    labels: usize,
}

/// Streams one corpus and computes its statistics row. With `lead_k = None`
/// the Lead-k length is the automatic one.
pub fn cmd_stats(path: &Path, name: &str, lead: Option<usize>, opts: &ScanOptions) -> Result<DatasetStats> {
    if lead == Some(0) {
        return Err(Error::InvalidArgument("lead k must be at least 1".into()));
    }
    let ks: Vec<usize> = match lead {
        Some(k) => vec![k],
        None => (1..=LEAD_SWEEP).collect(),
    };
    let mut density = Vec::new();
    let mut compression = Vec::new();
    let mut oracle = RougeMean::default();
    let mut leads = vec![RougeMean::default(); ks.len()];
    let mut label_counts = Vec::new();

    let info = scan_with_oracle(path, &[Split::Test], opts, |batch, labels| {
        let profiles = opts.exec.map(batch, StyleProfile::of);
        for p in profiles {
            let p = p?;
            density.push(p.density);
            compression.push(p.compression);
        }
        let test: Vec<(&Document, &LabelSet)> = batch
            .iter()
            .zip(labels)
            .filter_map(|(d, l)| l.as_ref().map(|l| (d, l)))
            .collect();
        let evals = opts.exec.map(&test, |(d, l)| TestEval {
            oracle: score_selection(d, &l.selected),
            leads: ks.iter().map(|&k| score_selection(d, &lead_k(d, k).selected)).collect(),
            labels: l.len(),
        });
        for e in &evals {
            oracle.add(&e.oracle);
            for (m, t) in leads.iter_mut().zip(&e.leads) {
                m.add(t);
            }
            label_counts.push(e.labels);
        }
        Ok(())
    })?;
    if info.counts.test == 0 {
        return Err(Error::MissingSplit {
            corpus: name.to_string(),
            split: Split::Test.to_string(),
        });
    }
    let auto = auto_k(label_counts.iter().copied());
    let k = lead.unwrap_or(auto);
    let lead_mean = match ks.iter().position(|&x| x == k) {
        Some(i) => leads[i].mean(),
        None => lead_pass(path, k, opts)?,
    };
    Ok(DatasetStats {
        name: name.to_string(),
        train: info.counts.train,
        valid: info.counts.valid,
        test: info.counts.test,
        skipped: info.skipped,
        density: MeanMedian::of(density),
        compression: MeanMedian::of(compression),
        lead_k: k,
        lead: RougeF1::percent(&lead_mean),
        oracle: RougeF1::percent(&oracle.mean()),
        oracle_mean_labels: label_counts.iter().sum::<usize>() as f64 / label_counts.len() as f64,
        auto_k: auto,
    })
}

fn lead_pass(path: &Path, k: usize, opts: &ScanOptions) -> Result<RougeTriple> {
    let mut mean = RougeMean::default();
    let mut stream = DocumentStream::open(path, opts.exec)?.with_batch_size(opts.batch);
    while let Some(batch) = stream.next_batch()? {
        let test: Vec<&Document> = batch.iter().filter(|d| d.split == Split::Test).collect();
        for t in opts.exec.map(&test, |d| score_selection(d, &lead_k(d, k).selected)) {
            mean.add(&t);
        }
    }
    Ok(mean.mean())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    Pcr,
    Ccr,
}

impl Measure {
    pub fn as_str(self) -> &'static str {
        match self {
            Measure::Pcr => "pcr",
            Measure::Ccr => "ccr",
        }
    }
}

impl FromStr for Measure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "pcr" => Ok(Measure::Pcr),
            "ccr" => Ok(Measure::Ccr),
            _ => Err(format!("unknown measure `{s}`")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MatrixParams {
    pub thresholds: ThresholdSet,
    pub pcr: PcrParams,
    pub top_m: usize,
    pub ccr_scale: f64,
}

impl Default for MatrixParams {
    fn default() -> Self {
        MatrixParams {
            thresholds: ThresholdSet::default(),
            pcr: PcrParams::default(),
            top_m: DEFAULT_TOP_M,
            ccr_scale: DEFAULT_CCR_SCALE,
        }
    }
}

/// Positional and pattern counts of ground-truth sentences on the train and
/// test sides of one corpus.
#[derive(Debug, Clone)]
pub struct CorpusSides {
    pub name: String,
    pub train_positions: PositionCounts,
    pub test_positions: PositionCounts,
    pub train_patterns: PatternCounts,
    pub test_patterns: PatternCounts,
}

fn side_counts(docs: &[(&Document, &LabelSet)], th: &ThresholdSet, exec: Execution) -> (PositionCounts, PatternCounts) {
    let parts = exec.map(docs, |(d, l)| {
        let mut pos = PositionCounts::new(th.bins());
        pos.add_labels(d, &l.selected, th);
        (pos, PatternCounts::of_labeled(d, &l.selected))
    });
    let mut pos = PositionCounts::new(th.bins());
    let mut pat = PatternCounts::new();
    for (p, c) in parts {
        pos.merge(&p);
        pat.merge(c);
    }
    (pos, pat)
}

/// Streams a corpus and collects both sides. Fails if either split is empty.
pub fn corpus_sides(path: &Path, name: &str, th: &ThresholdSet, opts: &ScanOptions) -> Result<CorpusSides> {
    let mut sides = CorpusSides {
        name: name.to_string(),
        train_positions: PositionCounts::new(th.bins()),
        test_positions: PositionCounts::new(th.bins()),
        train_patterns: PatternCounts::new(),
        test_patterns: PatternCounts::new(),
    };
    let info = scan_with_oracle(path, &[Split::Train, Split::Test], opts, |batch, labels| {
        for (split, pos, pat) in [
            (Split::Train, &mut sides.train_positions, &mut sides.train_patterns),
            (Split::Test, &mut sides.test_positions, &mut sides.test_patterns),
        ] {
            let docs: Vec<(&Document, &LabelSet)> = batch
                .iter()
                .zip(labels)
                .filter(|(d, _)| d.split == split)
                .filter_map(|(d, l)| l.as_ref().map(|l| (d, l)))
                .collect();
            let (p, c) = side_counts(&docs, th, opts.exec);
            pos.merge(&p);
            pat.merge(c);
        }
        Ok(())
    })?;
    for split in [Split::Train, Split::Test] {
        if info.counts.get(split) == 0 {
            return Err(Error::MissingSplit {
                corpus: name.to_string(),
                split: split.to_string(),
            });
        }
    }
    Ok(sides)
}

/// Square matrix over corpora in input order; cell `(i, j)` compares the
/// train side of corpus `i` with the test side of corpus `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftMatrix {
    pub measure: Measure,
    pub names: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl ShiftMatrix {
    /// True when every diagonal entry is strictly the largest in its row.
    pub fn diagonal_dominant(&self) -> bool {
        self.values
            .iter()
            .enumerate()
            .all(|(i, row)| row.iter().enumerate().all(|(j, &v)| i == j || row[i] > v))
    }
}

pub fn shift_matrix(sides: &[CorpusSides], measure: Measure, params: &MatrixParams) -> Result<ShiftMatrix> {
    let names = sides.iter().map(|s| s.name.clone()).collect();
    let values = match measure {
        Measure::Pcr => {
            let named = |r: Result<_>, name: &str, side: &str| {
                r.map_err(|e| match e {
                    Error::NoLabeledSentences => Error::InvalidArgument(format!(
                        "corpus `{name}` has no ground-truth sentences on its {side} side"
                    )),
                    e => e,
                })
            };
            let train = sides
                .iter()
                .map(|s| named(s.train_positions.distribution(), &s.name, "train"))
                .collect::<Result<Vec<_>>>()?;
            let test = sides
                .iter()
                .map(|s| named(s.test_positions.distribution(), &s.name, "test"))
                .collect::<Result<Vec<_>>>()?;
            train
                .iter()
                .map(|a| test.iter().map(|b| pcr(a, b, params.pcr)).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?
        }
        Measure::Ccr => {
            let train = sides
                .iter()
                .map(|s| PatternTable::from_counts(&s.train_patterns, params.top_m))
                .collect::<Result<Vec<_>>>()?;
            let test = sides
                .iter()
                .map(|s| PatternTable::from_counts(&s.test_patterns, params.top_m))
                .collect::<Result<Vec<_>>>()?;
            train
                .iter()
                .map(|a| test.iter().map(|b| ccr(a, b, params.ccr_scale)).collect())
                .collect()
        }
    };
    Ok(ShiftMatrix {
        measure,
        names,
        values,
    })
}

/// Streams each corpus once and builds the requested matrices.
pub fn cmd_matrix(
    corpora: &[(String, PathBuf)],
    measures: &[Measure],
    params: &MatrixParams,
    opts: &ScanOptions,
) -> Result<Vec<ShiftMatrix>> {
    if corpora.len() < 2 {
        return Err(Error::InvalidArgument("a shift matrix needs at least two corpora".into()));
    }
    let sides = corpora
        .iter()
        .map(|(name, path)| corpus_sides(path, name, &params.thresholds, opts))
        .collect::<Result<Vec<_>>>()?;
    measures.iter().map(|&m| shift_matrix(&sides, m, params)).collect()
}

/// Pattern table of the ground-truth sentences of `docs`. With
/// `discriminative`, the top set favours patterns rare outside ground truth.
pub fn pattern_table(
    docs: &[&Document],
    labels: &Labels,
    top_m: usize,
    discriminative: bool,
    exec: Execution,
) -> Result<PatternTable> {
    let parts = exec.map(docs, |d| {
        let sel = labels.get(&d.id).map(|l| l.selected.as_slice()).unwrap_or(&[]);
        let rest = if discriminative {
            PatternCounts::of_unlabeled(d, sel)
        } else {
            PatternCounts::new()
        };
        (PatternCounts::of_labeled(d, sel), rest)
    });
    let mut gt = PatternCounts::new();
    let mut rest = PatternCounts::new();
    for (g, r) in parts {
        gt.merge(g);
        rest.merge(r);
    }
    let sel = if discriminative {
        TopSelection::Discriminative(&rest)
    } else {
        TopSelection::Frequency
    };
    PatternTable::with_selection(&gt, top_m, sel)
}

/// Mean salience concentration per bin of a document-level assignment,
/// restricted to `docs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SalienceRow {
    pub bin: String,
    pub docs: usize,
    /// `(mean score, mean percent of total)` per rank.
    pub ranks: Vec<(f64, f64)>,
}

pub fn salience_by_bins(
    bins: &BinAssignment,
    docs: &[&Document],
    top_j: usize,
    denom: SalienceDenominator,
    exec: Execution,
) -> Result<Vec<SalienceRow>> {
    let by_id: std::collections::HashMap<&str, &Document> = docs.iter().map(|d| (d.id.as_str(), *d)).collect();
    let items: Vec<(&Document, usize)> = bins
        .items
        .iter()
        .filter_map(|(it, b)| by_id.get(it.doc_id.as_str()).map(|d| (*d, *b)))
        .collect();
    let conc = exec.map(&items, |(d, _)| salience_concentration(d, top_j, denom));
    let mut means: Vec<ConcentrationMean> = (0..bins.n_bins).map(|_| ConcentrationMean::new(top_j)).collect();
    for ((_, b), c) in items.iter().zip(conc) {
        means[*b].add(&c?);
    }
    Ok(means
        .iter()
        .enumerate()
        .map(|(b, m)| SalienceRow {
            bin: bins.label(b),
            docs: m.count(),
            ranks: m.means(),
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Tsv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "tsv" => Ok(Format::Tsv),
            "json" => Ok(Format::Json),
            _ => Err(format!("unknown format `{s}` (expected tsv or json)")),
        }
    }
}

fn f2(x: f64) -> String {
    format!("{x:.2}")
}

fn opt(x: Option<f64>, scale: f64) -> String {
    x.map(|v| f2(v * scale)).unwrap_or_else(|| "-".into())
}

/// Pretty JSON with a trailing newline. Floats serialize in shortest
/// round-trip form.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report values serialize");
    s.push('\n');
    s
}

pub fn stats_tsv(rows: &[DatasetStats]) -> String {
    let mut out = String::from(
        "dataset\ttrain\tvalid\ttest\tdensity_mean\tdensity_median\tcompression_mean\tcompression_median\t\
         lead_k\tlead_r1\tlead_r2\tlead_rl\toracle_r1\toracle_r2\toracle_rl\toracle_labels\tauto_k\n",
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.name,
            r.train,
            r.valid,
            r.test,
            f2(r.density.mean),
            f2(r.density.median),
            f2(r.compression.mean),
            f2(r.compression.median),
            r.lead_k,
            f2(r.lead.r1),
            f2(r.lead.r2),
            f2(r.lead.rl),
            f2(r.oracle.r1),
            f2(r.oracle.r2),
            f2(r.oracle.rl),
            f2(r.oracle_mean_labels),
            r.auto_k,
        );
    }
    out
}

pub fn matrix_tsv(m: &ShiftMatrix) -> String {
    let mut out = format!("{}\t{}\n", m.measure.as_str(), m.names.join("\t"));
    for (name, row) in m.names.iter().zip(&m.values) {
        let cells: Vec<String> = row.iter().map(|&v| f2(v)).collect();
        let _ = writeln!(out, "{name}\t{}", cells.join("\t"));
    }
    out
}

/// Accuracy and F1 are printed in percent like the ROUGE columns.
pub fn breakdown_tsv(r: &BreakdownReport) -> String {
    let mut out = String::from("bin\tcount\taccuracy\tf1\tr1\tr2\trl\n");
    for row in &r.rows {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            row.bin,
            row.count,
            opt(row.accuracy, 100.0),
            opt(row.f1, 100.0),
            opt(row.r1, 1.0),
            opt(row.r2, 1.0),
            opt(row.rl, 1.0),
        );
    }
    out
}

pub fn salience_tsv(rows: &[SalienceRow]) -> String {
    let ranks = rows.first().map_or(0, |r| r.ranks.len());
    let mut out = String::from("bin\tdocs");
    for j in 1..=ranks {
        let _ = write!(out, "\tscore_{j}\tpct_{j}");
    }
    out.push('\n');
    for r in rows {
        let _ = write!(out, "{}\t{}", r.bin, r.docs);
        for (s, p) in &r.ranks {
            let _ = write!(out, "\t{}\t{}", f2(*s), f2(*p));
        }
        out.push('\n');
    }
    out
}

/// Corpus-level ROUGE row.
pub fn rouge_tsv(name: &str, r: &RougeF1) -> String {
    format!("name\tr1\tr2\trl\n{name}\t{}\t{}\t{}\n", f2(r.r1), f2(r.r2), f2(r.rl))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn mean_median_cases() {
        assert_eq!(MeanMedian::of(vec![3.0, 1.0, 2.0]), MeanMedian { mean: 2.0, median: 2.0 });
        assert_eq!(MeanMedian::of(vec![4.0, 1.0, 2.0, 3.0]).median, 2.5);
        assert_eq!(MeanMedian::of(vec![]), MeanMedian::default());
    }

    #[test]
    fn percent_conversion() {
        let t = RougeTriple::score(&["a", "b"], &["a", "b"]);
        let p = RougeF1::percent(&t);
        assert_abs_diff_eq!(p.r1, 100.0);
        assert_abs_diff_eq!(p.rl, 100.0);
    }

    #[test]
    fn diagonal_dominance_check() {
        let m = ShiftMatrix {
            measure: Measure::Pcr,
            names: vec!["a".into(), "b".into()],
            values: vec![vec![2.0, 1.0], vec![1.0, 2.0]],
        };
        assert!(m.diagonal_dominant());
        let tied = ShiftMatrix {
            values: vec![vec![2.0, 2.0], vec![1.0, 2.0]],
            ..m.clone()
        };
        assert!(!tied.diagonal_dominant());
        assert_eq!(matrix_tsv(&m), "pcr\ta\tb\na\t2.00\t1.00\nb\t1.00\t2.00\n");
    }

    #[test]
    fn json_round_trips() {
        let m = ShiftMatrix {
            measure: Measure::Ccr,
            names: vec!["x".into()],
            values: vec![vec![0.1 + 0.2]],
        };
        let back: ShiftMatrix = serde_json::from_str(&to_json(&m)).unwrap();
        assert_eq!(back, m);
    }
}
