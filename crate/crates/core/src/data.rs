//! Resources bundled with the crate.

/// Five demonstration core-element seeds, tab-separated.
pub const DEMO_CORES: &str = include_str!("../data/demo_cores.tsv");

/// Starter DM lexicon for prefix splitting.
pub const DM_LEXICON: &str = include_str!("../data/dm_lexicon.txt");

/// Argument-marker sense lexicon (`dm<TAB>sense`).
pub const ARG_MARKERS: &str = include_str!("../data/arg_markers.tsv");

/// Level-1 discourse-relation sense lexicon (`dm<TAB>sense`).
pub const DISC_RELATIONS: &str = include_str!("../data/disc_relations.tsv");

/// Tiny synthetic word-vector table in the standard text format.
pub const DEMO_VECTORS: &str = include_str!("../data/demo_vectors.txt");
