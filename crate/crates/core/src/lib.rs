//! Profiling of extractive summarization datasets: corpus loading, text
//! normalization, ROUGE, oracle and Lead-k baselines, style factors
//! (density, compression, salience), constituent factors (positional and
//! content coverage), test-set breakdowns and report tables.

pub mod baselines;
pub mod breakdown;
pub mod constituent;
pub mod corpus;
pub mod error;
pub mod metrics;
pub mod par;
pub mod report;
pub mod style;
pub mod synth;
pub mod textnorm;

pub use baselines::{greedy_oracle, lead_k, LabelSet, Labels};
pub use corpus::{load_corpus, Corpus, Document, Split};
pub use error::{Error, Result};
pub use par::Execution;
