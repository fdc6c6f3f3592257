//! DM sense lexicons: argument-marker senses and level-1 discourse-relation
//! senses.

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::dm_key;

pub const ARG_MARKER_SENSES: [&str; 4] = ["thesis", "rebuttal", "backward", "forward"];
pub const DISC_REL_SENSES: [&str; 4] = ["Comparison", "Contingency", "Expansion", "Temporal"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LexiconKind {
    ArgMarker,
    DiscRel,
}

impl LexiconKind {
    pub fn senses(self) -> &'static [&'static str] {
        match self {
            LexiconKind::ArgMarker => &ARG_MARKER_SENSES,
            LexiconKind::DiscRel => &DISC_REL_SENSES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SenseLexicon {
    kind: LexiconKind,
    map: BTreeMap<String, String>,
    multi_sense: BTreeSet<String>,
}

impl SenseLexicon {
    /// Builds a lexicon from `(dm, sense)` rows. Argument-marker DMs listed
    /// under several senses keep the one earliest in [`ARG_MARKER_SENSES`]
    /// and are flagged; discourse-relation rows must already be resolved.
    pub fn from_rows<S: AsRef<str>, T: AsRef<str>>(
        kind: LexiconKind,
        rows: impl IntoIterator<Item = (S, T)>,
    ) -> Result<Self> {
        let allowed = kind.senses();
        let mut map: BTreeMap<String, String> = BTreeMap::new();
        let mut multi_sense = BTreeSet::new();
        for (dm, sense) in rows {
            let dm = dm_key(dm.as_ref());
            let sense = sense.as_ref().trim();
            let Some(&sense) = allowed.iter().find(|s| s.eq_ignore_ascii_case(sense)) else {
                return Err(Error::InvalidInput(format!(
                    "unknown {kind:?} sense {sense:?} for {dm:?}"
                )));
            };
            match map.get(&dm) {
                None => {
                    map.insert(dm, sense.to_string());
                }
                Some(old) if old == sense => {}
                Some(old) => {
                    if kind == LexiconKind::DiscRel {
                        return Err(Error::InvalidInput(format!(
                            "{dm:?} listed as both {old} and {sense}; resolve to one sense"
                        )));
                    }
                    let rank = |s: &str| allowed.iter().position(|a| *a == s).unwrap_or(usize::MAX);
                    if rank(sense) < rank(old) {
                        map.insert(dm.clone(), sense.to_string());
                    }
                    multi_sense.insert(dm);
                }
            }
        }
        if map.is_empty() {
            return Err(Error::InvalidInput("sense lexicon is empty".into()));
        }
        Ok(SenseLexicon { kind, map, multi_sense })
    }

    /// TSV `dm<TAB>sense`; `#` lines are comments.
    pub fn read<R: BufRead>(reader: R, kind: LexiconKind, source: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (dm, sense) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(source, n + 1, "expected dm<TAB>sense"))?;
            rows.push((dm.to_string(), sense.to_string()));
        }
        Self::from_rows(kind, rows).map_err(|e| Error::InvalidInput(format!("{source}: {e}")))
    }

    pub fn arg_markers() -> Self {
        Self::read(
            crate::data::ARG_MARKERS.as_bytes(),
            LexiconKind::ArgMarker,
            "arg_markers.tsv",
        )
        .expect("bundled lexicon")
    }

    pub fn disc_relations() -> Self {
        Self::read(
            crate::data::DISC_RELATIONS.as_bytes(),
            LexiconKind::DiscRel,
            "disc_relations.tsv",
        )
        .expect("bundled lexicon")
    }

    pub fn kind(&self) -> LexiconKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// DMs that were listed under more than one sense.
    pub fn multi_sense(&self) -> &BTreeSet<String> {
        &self.multi_sense
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.map.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}

/// Sense of `dm` by exact lookup after normalization, `None` on a miss.
pub fn sense_of<'a>(dm: &str, lex: &'a SenseLexicon) -> Option<&'a str> {
    lex.map.get(&dm_key(dm)).map(String::as_str)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SenseMatch {
    Match,
    Mismatch,
    /// The gold DM has no sense, so the pair is not scored.
    Excluded,
}

impl SenseMatch {
    pub fn score(self) -> Option<f64> {
        match self {
            SenseMatch::Match => Some(1.0),
            SenseMatch::Mismatch => Some(0.0),
            SenseMatch::Excluded => None,
        }
    }
}

pub fn sense_match(pred: &str, gold: &str, lex: &SenseLexicon) -> SenseMatch {
    match sense_of(gold, lex) {
        None => SenseMatch::Excluded,
        Some(g) if sense_of(pred, lex) == Some(g) => SenseMatch::Match,
        Some(_) => SenseMatch::Mismatch,
    }
}
