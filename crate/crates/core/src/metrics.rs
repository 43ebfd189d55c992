//! ROUGE-N, ROUGE-L and longest common subsequence.
//!
//! All functions are generic over the token type so the same code scores
//! string tokens and interned ids. Multi-sentence inputs are expected to be
//! concatenated by the caller. No stemming happens here.

use std::collections::HashMap;
use std::hash::Hash;
use std::ops::AddAssign;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RougeScore {
    pub recall: f64,
    pub precision: f64,
    pub f1: f64,
}

impl RougeScore {
    pub const ZERO: RougeScore = RougeScore {
        recall: 0.0,
        precision: 0.0,
        f1: 0.0,
    };

    pub fn new(recall: f64, precision: f64) -> Self {
        let f1 = if recall + precision > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        RougeScore {
            recall,
            precision,
            f1,
        }
    }

    fn from_matches(matched: usize, candidate_total: usize, reference_total: usize) -> Self {
        if reference_total == 0 || candidate_total == 0 {
            return RougeScore::ZERO;
        }
        RougeScore::new(
            matched as f64 / reference_total as f64,
            matched as f64 / candidate_total as f64,
        )
    }

    pub fn scaled(self, factor: f64) -> Self {
        RougeScore {
            recall: self.recall * factor,
            precision: self.precision * factor,
            f1: self.f1 * factor,
        }
    }
}

/// Multiset of n-grams of one sequence.
#[derive(Debug, Clone)]
pub struct NgramCounts<'a, T> {
    counts: HashMap<&'a [T], usize>,
    total: usize,
}

impl<'a, T: Hash + Eq> NgramCounts<'a, T> {
    pub fn new(tokens: &'a [T], n: usize) -> Self {
        assert!(n >= 1, "n-gram order must be at least 1");
        let mut counts = HashMap::new();
        let mut total = 0;
        if tokens.len() >= n {
            for w in tokens.windows(n) {
                *counts.entry(w).or_insert(0) += 1;
                total += 1;
            }
        }
        NgramCounts { counts, total }
    }

    pub fn total(&self) -> usize {
        self.total
    }

    /// Clipped multiset intersection size.
    pub fn overlap(&self, other: &NgramCounts<'_, T>) -> usize {
        let (small, large) = if self.counts.len() <= other.counts.len() {
            (self, other)
        } else {
            (other, self)
        };
        small
            .counts
            .iter()
            .map(|(g, &c)| large.counts.get(g).map_or(0, |&d| c.min(d)))
            .sum()
    }
}

pub fn rouge_n_counts<T: Hash + Eq>(
    candidate: &NgramCounts<'_, T>,
    reference: &NgramCounts<'_, T>,
) -> RougeScore {
    RougeScore::from_matches(candidate.overlap(reference), candidate.total, reference.total)
}

pub fn rouge_n<T: Hash + Eq>(candidate: &[T], reference: &[T], n: usize) -> RougeScore {
    rouge_n_counts(&NgramCounts::new(candidate, n), &NgramCounts::new(reference, n))
}

/// Length of the longest common subsequence, two-row dynamic program.
pub fn lcs_length<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let (outer, inner) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    if inner.is_empty() {
        return 0;
    }
    let mut prev = vec![0usize; inner.len() + 1];
    let mut cur = vec![0usize; inner.len() + 1];
    for x in outer {
        for (j, y) in inner.iter().enumerate() {
            cur[j + 1] = if x == y {
                prev[j] + 1
            } else {
                cur[j].max(prev[j + 1])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[inner.len()]
}

pub fn rouge_l<T: PartialEq>(candidate: &[T], reference: &[T]) -> RougeScore {
    let lcs = lcs_length(candidate, reference);
    RougeScore::from_matches(lcs, candidate.len(), reference.len())
}

/// Best score (by f1) over several references.
pub fn rouge_n_multi<T: Hash + Eq>(candidate: &[T], references: &[&[T]], n: usize) -> RougeScore {
    let cand = NgramCounts::new(candidate, n);
    best(references.iter().map(|r| rouge_n_counts(&cand, &NgramCounts::new(r, n))))
}

pub fn rouge_l_multi<T: PartialEq>(candidate: &[T], references: &[&[T]]) -> RougeScore {
    best(references.iter().map(|r| rouge_l(candidate, r)))
}

fn best(scores: impl Iterator<Item = RougeScore>) -> RougeScore {
    scores.fold(RougeScore::ZERO, |acc, s| if s.f1 > acc.f1 { s } else { acc })
}

/// ROUGE-1, ROUGE-2 and ROUGE-L of one candidate.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RougeTriple {
    pub r1: RougeScore,
    pub r2: RougeScore,
    pub rl: RougeScore,
}

impl RougeTriple {
    pub fn score<T: Hash + Eq>(candidate: &[T], reference: &[T]) -> Self {
        RougeTriple {
            r1: rouge_n(candidate, reference, 1),
            r2: rouge_n(candidate, reference, 2),
            rl: rouge_l(candidate, reference),
        }
    }

    pub fn scaled(self, factor: f64) -> Self {
        RougeTriple {
            r1: self.r1.scaled(factor),
            r2: self.r2.scaled(factor),
            rl: self.rl.scaled(factor),
        }
    }
}

/// Running mean of per-document scores. Sums are taken in insertion order.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RougeMean {
    sum: [[f64; 3]; 3],
    count: usize,
}

impl RougeMean {
    pub fn add(&mut self, t: &RougeTriple) {
        for (row, s) in self.sum.iter_mut().zip([t.r1, t.r2, t.rl]) {
            row[0] += s.recall;
            row[1] += s.precision;
            row[2] += s.f1;
        }
        self.count += 1;
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Mean of each component; all zero when empty. The mean f1 is the mean
    /// of per-document f1 values, not recomputed from mean p and r.
    pub fn mean(&self) -> RougeTriple {
        if self.count == 0 {
            return RougeTriple::default();
        }
        let n = self.count as f64;
        let get = |row: [f64; 3]| RougeScore {
            recall: row[0] / n,
            precision: row[1] / n,
            f1: row[2] / n,
        };
        RougeTriple {
            r1: get(self.sum[0]),
            r2: get(self.sum[1]),
            rl: get(self.sum[2]),
        }
    }
}

impl AddAssign<&RougeTriple> for RougeMean {
    fn add_assign(&mut self, rhs: &RougeTriple) {
        self.add(rhs);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn rouge_n_examples() {
        let c = ["the", "cat", "sat"];
        let r = ["the", "cat", "ran"];
        assert_abs_diff_eq!(rouge_n(&c, &r, 1).recall, 2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rouge_n(&c, &r, 2).recall, 0.5, epsilon = 1e-12);
        let s = rouge_n(&c, &c, 3);
        assert_eq!((s.recall, s.precision, s.f1), (1.0, 1.0, 1.0));
    }

    #[test]
    fn rouge_n_clips_and_handles_empty() {
        let s = rouge_n(&["a", "a", "a"], &["a", "b"], 1);
        assert_abs_diff_eq!(s.recall, 0.5);
        assert_abs_diff_eq!(s.precision, 1.0 / 3.0);
        assert_eq!(rouge_n(&["a", "b"], &["a"], 2), RougeScore::ZERO);
        assert_eq!(rouge_n::<&str>(&[], &["a"], 1), RougeScore::ZERO);
    }

    #[test]
    fn lcs_examples() {
        assert_eq!(lcs_length(&["a", "b", "c", "d"], &["a", "c", "d"]), 3);
        assert_eq!(lcs_length(&["a", "b"], &["c", "d"]), 0);
        assert_eq!(lcs_length::<u8>(&[], &[1, 2]), 0);
    }

    #[test]
    fn rouge_l_examples() {
        let s = rouge_l(&["a", "b", "c"], &["a", "c"]);
        assert_abs_diff_eq!(s.recall, 1.0);
        assert_abs_diff_eq!(s.precision, 2.0 / 3.0);
        assert_abs_diff_eq!(s.f1, 0.8, epsilon = 1e-12);
        assert_abs_diff_eq!(rouge_l(&["x", "y"], &["x", "y"]).f1, 1.0);
        assert_eq!(rouge_l::<u8>(&[], &[]), RougeScore::ZERO);
    }

    #[test]
    fn multi_reference_takes_max() {
        let c = ["a", "b"];
        let r1: &[&str] = &["z"];
        let r2: &[&str] = &["a", "b"];
        assert_abs_diff_eq!(rouge_n_multi(&c, &[r1, r2], 1).f1, 1.0);
        assert_abs_diff_eq!(rouge_l_multi(&c, &[r1, r2]).f1, 1.0);
        assert_eq!(rouge_l_multi::<&str>(&c, &[]), RougeScore::ZERO);
    }

    #[test]
    fn mean_accumulates() {
        let mut m = RougeMean::default();
        m.add(&RougeTriple::score(&["a"], &["a"]));
        m.add(&RougeTriple::default());
        assert_abs_diff_eq!(m.mean().r1.f1, 0.5);
        assert_eq!(m.count(), 2);
        assert_eq!(RougeMean::default().mean(), RougeTriple::default());
    }

    fn seq() -> impl Strategy<Value = Vec<u8>> {
        proptest::collection::vec(0u8..6, 0..20)
    }

    proptest! {
        #[test]
        fn self_score_is_one(x in seq(), n in 1usize..4) {
            prop_assume!(x.len() >= n);
            let s = rouge_n(&x, &x, n);
            prop_assert!((s.f1 - 1.0).abs() < 1e-12);
        }

        #[test]
        fn lcs_symmetric_and_bounded(a in seq(), b in seq()) {
            let l = lcs_length(&a, &b);
            prop_assert_eq!(l, lcs_length(&b, &a));
            prop_assert!(l <= a.len().min(b.len()));
        }

        #[test]
        fn scores_stay_in_unit_interval(a in seq(), b in seq(), n in 1usize..4) {
            for s in [rouge_n(&a, &b, n), rouge_l(&a, &b)] {
                for v in [s.recall, s.precision, s.f1] {
                    prop_assert!((0.0..=1.0).contains(&v));
                }
            }
        }
    }
}
