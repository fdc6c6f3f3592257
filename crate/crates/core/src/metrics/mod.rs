//! DM similarity and sense metrics, DM accuracy/coverage protocols,
//! sequence-labeling scores and agreement statistics.

pub mod agreement;
pub mod dm;
pub mod embed;
pub mod labeling;
pub mod sense;

pub use agreement::{cohens_kappa, mean_std, pearson};
pub use dm::{
    coverage_report, explicit_accuracy_report, sense_confusion, ConfusionRow, DmScorers, MetricReport, MetricScore,
    SenseConfusion, NO_SENSE,
};
pub use embed::{
    avg_vector_similarity, cosine, sentence_similarity, EmbeddingTable, PrecomputedEncoder, SentenceEncoder,
    TableEncoder,
};
pub use labeling::{span_f1, token_metrics, SpanScores, TokenScores};
pub use sense::{sense_match, sense_of, LexiconKind, SenseLexicon, SenseMatch};
