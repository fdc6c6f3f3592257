//! Discourse-marker augmentation and evaluation for argument mining.
//!
//! Synthetic template data, gold/predicted DM extraction, DM removal and
//! augmentation, annotation projection across edited token sequences, and
//! the DM and sequence-labeling metrics used to score all of it.

pub mod align;
pub mod artificial;
pub mod augment;
pub mod bio;
pub mod conll;
pub mod data;
pub mod diff;
pub mod error;
pub mod extract;
pub mod metrics;
pub mod pipeline;
pub mod text;

pub use bio::{bio_to_spans, spans_to_bio, AduSpan, BioMode, CorpusSchema, DmSlot, LabelSequence, Tag};
pub use error::{Error, Result};
pub use text::{detokenize, tokenize, TokenSequence};

/// Token alignment with integer scores, the usual instantiation.
pub type TokenAlignment = align::Alignment<i32>;
pub type Scoring = align::ScoringScheme<i32>;
/// Word vectors in single precision, as distributed vector files are.
pub type Embeddings = metrics::EmbeddingTable<f32>;
pub type DmReport = metrics::MetricReport<f64>;
