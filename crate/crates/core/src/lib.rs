//! Train word embeddings with a controllable context window, evaluate them on
//! word-similarity benchmarks and measure how often nearest neighbors share a
//! part of speech.
//!
//! The modules follow the experiment pipeline:
//!
//! * [`trainer`]: word-level CBOW and skip-gram with negative sampling.
//! * [`vecstore`]: word2vec text I/O, cosine similarity, exact k-NN.
//! * [`stats`]: Spearman/Pearson correlation, t-test p-values and the
//!   hypergeometric upper tail.
//! * [`benchmarks`]: similarity benchmark ingestion, evaluation and
//!   related/unrelated bands.
//! * [`lexicon`]: WordNet index parsing, most-frequent-tag lexicons and
//!   pivot lists.
//! * [`analysis`]: same-POS enrichment and neighbor-POS window sweeps.
//! * [`corpusgen`]: synthetic corpora with known word classes.

pub mod analysis;
pub mod benchmarks;
pub mod corpusgen;
mod error;
pub mod lexicon;
pub mod stats;
pub mod trainer;
pub mod vecstore;

pub use error::{Error, Result};
pub use lexicon::PosTag;
pub use trainer::{Algorithm, TrainConfig};
pub use vecstore::EmbeddingModel;
