//! Style factors: extractive fragments, density, compression and sentence
//! salience.

use serde::{Deserialize, Serialize};

use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::metrics::lcs_length;
use crate::textnorm::{content_tokens, Stopwords};

/// A run of summary tokens copied verbatim from the document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fragment {
    pub doc_start: usize,
    pub summary_start: usize,
    pub length: usize,
}

/// Greedy left-to-right fragment cover of the summary. At each uncovered
/// summary position the longest document match starting there is taken
/// (leftmost document position on ties); unmatched tokens are skipped.
pub fn extractive_fragments<T: PartialEq>(doc: &[T], summary: &[T]) -> Vec<Fragment> {
    let (n, m) = (summary.len(), doc.len());
    if n == 0 || m == 0 {
        return Vec::new();
    }
    // run[i][j]: length of the common run starting at summary i, doc j.
    // Filled bottom-up one summary row at a time.
    let mut best_at = vec![(0usize, 0usize); n];
    let mut next = vec![0usize; m + 1];
    let mut cur = vec![0usize; m + 1];
    for i in (0..n).rev() {
        let mut best = (0usize, 0usize);
        for j in (0..m).rev() {
            cur[j] = if summary[i] == doc[j] { next[j + 1] + 1 } else { 0 };
            if cur[j] >= best.0 && cur[j] > 0 {
                best = (cur[j], j);
            }
        }
        best_at[i] = best;
        std::mem::swap(&mut cur, &mut next);
    }
    let mut out = Vec::new();
    let mut i = 0;
    while i < n {
        let (len, j) = best_at[i];
        if len > 0 {
            out.push(Fragment {
                doc_start: j,
                summary_start: i,
                length: len,
            });
            i += len;
        } else {
            i += 1;
        }
    }
    out
}

/// Mean squared fragment length per summary token.
pub fn density<T: PartialEq>(doc: &[T], summary: &[T]) -> Result<f64> {
    if summary.is_empty() {
        return Err(Error::EmptySummary);
    }
    let sq: usize = extractive_fragments(doc, summary)
        .iter()
        .map(|f| f.length * f.length)
        .sum();
    Ok(sq as f64 / summary.len() as f64)
}

/// Document-to-summary token ratio.
pub fn compression(doc_len: usize, summary_len: usize) -> Result<f64> {
    if summary_len == 0 {
        return Err(Error::EmptySummary);
    }
    Ok(doc_len as f64 / summary_len as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StyleProfile {
    pub density: f64,
    pub compression: f64,
}

impl StyleProfile {
    pub fn of(doc: &Document) -> Result<Self> {
        let text = doc.text_tokens();
        let summary = doc.summary_tokens();
        Ok(StyleProfile {
            density: density(&text, &summary)?,
            compression: compression(text.len(), summary.len())?,
        })
    }
}

/// What the salience ratio divides by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SalienceDenominator {
    /// Content tokens of the sentence, the same alphabet as the LCS.
    #[default]
    Content,
    /// All tokens of the sentence, punctuation and stopwords included.
    All,
}

/// Content-token LCS between a sentence and the summary, divided by the
/// sentence length. Zero when the sentence has no content tokens.
pub fn salience<S: AsRef<str>>(sentence: &[S], summary: &[S], denom: SalienceDenominator) -> f64 {
    let sw = Stopwords::english();
    salience_content(&content_tokens(sentence, sw), &content_tokens(summary, sw), sentence.len(), denom)
}

fn salience_content(sentence: &[&str], summary: &[&str], raw_len: usize, denom: SalienceDenominator) -> f64 {
    if sentence.is_empty() {
        return 0.0;
    }
    let lcs = lcs_length(sentence, summary) as f64;
    match denom {
        SalienceDenominator::Content => lcs / sentence.len() as f64,
        SalienceDenominator::All => lcs / raw_len as f64,
    }
}

/// Per-sentence salience plus the top scores and their share of the total.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Concentration {
    pub scores: Vec<f64>,
    /// `(sentence index, score, percent of total)`, highest first.
    pub top: Vec<(usize, f64, f64)>,
}

pub fn salience_concentration(doc: &Document, top_j: usize, denom: SalienceDenominator) -> Result<Concentration> {
    if top_j == 0 {
        return Err(Error::InvalidArgument("top_j must be at least 1".into()));
    }
    let sw = Stopwords::english();
    let summary = doc.summary_tokens();
    let summary_content = content_tokens(&summary, sw);
    let scores: Vec<f64> = doc
        .sentences
        .iter()
        .map(|s| salience_content(&content_tokens(s, sw), &summary_content, s.len(), denom))
        .collect();
    let total: f64 = scores.iter().sum();
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let top = order
        .into_iter()
        .take(top_j)
        .map(|i| {
            let pct = if total > 0.0 { 100.0 * scores[i] / total } else { 0.0 };
            (i, scores[i], pct)
        })
        .collect();
    Ok(Concentration { scores, top })
}

/// Mean salience and share per rank over a group of documents.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConcentrationMean {
    score_sum: Vec<f64>,
    pct_sum: Vec<f64>,
    count: usize,
}

impl ConcentrationMean {
    pub fn new(top_j: usize) -> Self {
        ConcentrationMean {
            score_sum: vec![0.0; top_j],
            pct_sum: vec![0.0; top_j],
            count: 0,
        }
    }

    /// Documents with fewer than `top_j` sentences contribute zeros to the
    /// missing ranks.
    pub fn add(&mut self, c: &Concentration) {
        for (r, &(_, s, p)) in c.top.iter().enumerate().take(self.score_sum.len()) {
            self.score_sum[r] += s;
            self.pct_sum[r] += p;
        }
        self.count += 1;
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// `(mean score, mean percent)` per rank.
    pub fn means(&self) -> Vec<(f64, f64)> {
        let n = self.count.max(1) as f64;
        self.score_sum
            .iter()
            .zip(&self.pct_sum)
            .map(|(s, p)| (s / n, p / n))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Split;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn lens(f: &[Fragment]) -> Vec<usize> {
        f.iter().map(|f| f.length).collect()
    }

    #[test]
    fn fragment_examples() {
        let d = ["a", "b", "c", "d", "e"];
        let f = extractive_fragments(&d, &["b", "c", "e"]);
        assert_eq!(lens(&f), [2, 1]);
        assert_eq!(f[0].doc_start, 1);
        assert_eq!(f[1], Fragment { doc_start: 4, summary_start: 2, length: 1 });
        assert_eq!(lens(&extractive_fragments(&d, &["b", "c", "d"])), [3]);
        assert!(extractive_fragments(&d, &["z"]).is_empty());
    }

    #[test]
    fn fragments_prefer_leftmost_on_ties() {
        let f = extractive_fragments(&["x", "a", "y", "a"], &["a"]);
        assert_eq!(f[0].doc_start, 1);
    }

    #[test]
    fn density_and_compression_examples() {
        let d = ["a", "b", "c", "d", "e"];
        assert_abs_diff_eq!(density(&d, &["b", "c", "e"]).unwrap(), 5.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(density(&d, &["b", "c", "d"]).unwrap(), 3.0);
        assert!(matches!(density::<&str>(&d, &[]), Err(Error::EmptySummary)));
        assert_abs_diff_eq!(compression(20, 5).unwrap(), 4.0);
        assert_abs_diff_eq!(compression(7, 7).unwrap(), 1.0);
        assert!(compression(7, 0).is_err());
    }

    #[test]
    fn salience_examples() {
        let s = salience(&["big", "cat", "sat"], &["cat", "sat", "down"], SalienceDenominator::Content);
        assert_abs_diff_eq!(s, 2.0 / 3.0, epsilon = 1e-12);
        let s = salience(&["the", "cat", ",", "sat"], &["a", "cat", "sat", "down"], SalienceDenominator::Content);
        assert_abs_diff_eq!(s, 1.0);
        let s = salience(&["the", "cat", ",", "sat"], &["a", "cat", "sat", "down"], SalienceDenominator::All);
        assert_abs_diff_eq!(s, 0.5);
        assert_eq!(salience(&["dog"], &["cat"], SalienceDenominator::Content), 0.0);
        assert_eq!(salience(&["the", "."], &["cat"], SalienceDenominator::Content), 0.0);
    }

    fn doc(sents: &[&[&str]], summary: &[&str]) -> Document {
        Document {
            id: "d".into(),
            domain: None,
            split: Split::Test,
            sentences: sents
                .iter()
                .map(|s| s.iter().map(|t| t.to_string()).collect())
                .collect(),
            summary: vec![summary.iter().map(|t| t.to_string()).collect()],
        }
    }

    #[test]
    fn concentration_examples() {
        // psi = [0.4, 0.4, 0.2] with content denominators of 5
        let d = doc(
            &[
                &["a1", "a2", "x1", "x2", "x3"],
                &["a1", "a2", "y1", "y2", "y3"],
                &["a1", "z1", "z2", "z3", "z4"],
            ],
            &["a1", "a2"],
        );
        let c = salience_concentration(&d, 1, SalienceDenominator::Content).unwrap();
        assert_eq!(c.top.len(), 1);
        assert_eq!(c.top[0].0, 0);
        assert_abs_diff_eq!(c.top[0].1, 0.4);
        assert_abs_diff_eq!(c.top[0].2, 40.0, epsilon = 1e-9);

        let single = doc(&[&["cat", "sat"]], &["cat"]);
        let c = salience_concentration(&single, 3, SalienceDenominator::Content).unwrap();
        assert_abs_diff_eq!(c.top[0].2, 100.0);

        let none = doc(&[&["dog"]], &["cat"]);
        let c = salience_concentration(&none, 1, SalienceDenominator::Content).unwrap();
        assert_eq!(c.top[0].2, 0.0);
        assert!(salience_concentration(&none, 0, SalienceDenominator::Content).is_err());

        let mut m = ConcentrationMean::new(2);
        m.add(&salience_concentration(&d, 2, SalienceDenominator::Content).unwrap());
        assert_abs_diff_eq!(m.means()[1].0, 0.4);
    }

    fn seq(max: usize) -> impl Strategy<Value = Vec<u8>> {
        proptest::collection::vec(0u8..5, 0..max)
    }

    proptest! {
        #[test]
        fn density_bounds(d in seq(30), s in seq(10)) {
            prop_assume!(!s.is_empty());
            let v = density(&d, &s).unwrap();
            prop_assert!(v >= 0.0 && v <= s.len() as f64);
            let frags = extractive_fragments(&d, &s);
            let covered: usize = frags.iter().map(|f| f.length).sum();
            prop_assert!(covered <= s.len());
            for w in frags.windows(2) {
                prop_assert!(w[0].summary_start + w[0].length <= w[1].summary_start);
            }
        }

        #[test]
        fn compression_ignores_segmentation(a in 1usize..50, b in 1usize..50, cut in 0usize..50) {
            let c = compression(a + b, b).unwrap();
            let (x, y) = (cut.min(a), a - cut.min(a));
            prop_assert_eq!(c, compression(x + y + b, b).unwrap());
        }
    }
}
