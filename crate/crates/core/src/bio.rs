//! BIO tags, ADU spans and the conversions between them.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tag {
    O,
    B(String),
    I(String),
}

impl Tag {
    pub fn label(&self) -> Option<&str> {
        match self {
            Tag::O => None,
            Tag::B(l) | Tag::I(l) => Some(l),
        }
    }

    pub fn is_inside(&self) -> bool {
        matches!(self, Tag::I(_))
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tag::O => f.write_str("O"),
            Tag::B(l) => write!(f, "B-{l}"),
            Tag::I(l) => write!(f, "I-{l}"),
        }
    }
}

impl FromStr for Tag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "O" => Ok(Tag::O),
            _ => match s.split_once('-') {
                Some(("B", l)) if !l.is_empty() => Ok(Tag::B(l.to_string())),
                Some(("I", l)) if !l.is_empty() => Ok(Tag::I(l.to_string())),
                _ => Err(Error::MalformedTag(s.to_string())),
            },
        }
    }
}

impl Serialize for Tag {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Tag {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A sequence of BIO tags, parallel to a token sequence.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LabelSequence(Vec<Tag>);

impl LabelSequence {
    pub fn new(tags: Vec<Tag>) -> Self {
        LabelSequence(tags)
    }

    pub fn all_outside(len: usize) -> Self {
        LabelSequence(vec![Tag::O; len])
    }

    pub fn parse<S: AsRef<str>>(tags: &[S]) -> Result<Self> {
        tags.iter()
            .map(|t| t.as_ref().parse())
            .collect::<Result<Vec<_>>>()
            .map(LabelSequence)
    }

    pub fn tags(&self) -> &[Tag] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<Tag> {
        self.0
    }

    /// Index of the first `I-t` that does not continue a `B-t`/`I-t`.
    pub fn first_invalid(&self) -> Option<usize> {
        let mut prev: Option<&str> = None;
        for (i, tag) in self.0.iter().enumerate() {
            if let Tag::I(l) = tag {
                if prev != Some(l.as_str()) {
                    return Some(i);
                }
            }
            prev = tag.label();
        }
        None
    }

    pub fn is_valid(&self) -> bool {
        self.first_invalid().is_none()
    }

    /// Promotes every dangling `I-t` to `B-t`.
    pub fn repaired(mut self) -> Self {
        let mut prev: Option<String> = None;
        for tag in &mut self.0 {
            if let Tag::I(l) = tag {
                if prev.as_deref() != Some(l.as_str()) {
                    *tag = Tag::B(std::mem::take(l));
                }
            }
            prev = tag.label().map(str::to_string);
        }
        self
    }
}

impl Deref for LabelSequence {
    type Target = [Tag];

    fn deref(&self) -> &[Tag] {
        &self.0
    }
}

impl AsRef<[Tag]> for LabelSequence {
    fn as_ref(&self) -> &[Tag] {
        &self.0
    }
}

impl FromIterator<Tag> for LabelSequence {
    fn from_iter<I: IntoIterator<Item = Tag>>(iter: I) -> Self {
        LabelSequence(iter.into_iter().collect())
    }
}

/// An argumentative discourse unit over token indices `[start, end)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AduSpan {
    pub start: usize,
    pub end: usize,
    pub label: String,
}

impl AduSpan {
    pub fn new(start: usize, end: usize, label: impl Into<String>) -> Self {
        AduSpan {
            start,
            end,
            label: label.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.start..self.end
    }
}

/// Checks bounds and pairwise disjointness; returns the spans sorted by start.
pub fn validate_spans(spans: &[AduSpan], len: usize) -> Result<Vec<AduSpan>> {
    let mut sorted = spans.to_vec();
    sorted.sort();
    for s in &sorted {
        if s.start >= s.end || s.end > len {
            return Err(Error::SpanOutOfRange { span: s.clone(), len });
        }
    }
    for w in sorted.windows(2) {
        if w[1].start < w[0].end {
            return Err(Error::SpanOverlap {
                span: w[1].clone(),
                other: w[0].clone(),
            });
        }
    }
    Ok(sorted)
}

pub fn spans_to_bio(spans: &[AduSpan], len: usize) -> Result<LabelSequence> {
    let spans = validate_spans(spans, len)?;
    let mut tags = vec![Tag::O; len];
    for s in spans {
        tags[s.start] = Tag::B(s.label.clone());
        for t in &mut tags[s.start + 1..s.end] {
            *t = Tag::I(s.label.clone());
        }
    }
    Ok(LabelSequence(tags))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum BioMode {
    /// A dangling `I-t` opens a new span.
    #[default]
    Tolerant,
    /// A dangling `I-t` is an error.
    Strict,
}

pub fn bio_to_spans(labels: &[Tag], mode: BioMode) -> Result<Vec<AduSpan>> {
    let mut spans = Vec::new();
    let mut open: Option<AduSpan> = None;
    for (i, tag) in labels.iter().enumerate() {
        match tag {
            Tag::O => spans.extend(open.take().map(|mut s| {
                s.end = i;
                s
            })),
            Tag::B(l) => {
                spans.extend(open.take().map(|mut s| {
                    s.end = i;
                    s
                }));
                open = Some(AduSpan::new(i, i + 1, l.clone()));
            }
            Tag::I(l) => match &open {
                Some(s) if s.label == *l => {}
                _ => {
                    if mode == BioMode::Strict {
                        return Err(Error::InvalidBio {
                            index: i,
                            tag: tag.to_string(),
                        });
                    }
                    spans.extend(open.take().map(|mut s| {
                        s.end = i;
                        s
                    }));
                    open = Some(AduSpan::new(i, i + 1, l.clone()));
                }
            },
        }
    }
    spans.extend(open.take().map(|mut s| {
        s.end = labels.len();
        s
    }));
    Ok(spans)
}

/// Corpus identifier and its ADU label inventory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusSchema {
    pub name: String,
    pub adu_labels: BTreeSet<String>,
}

impl CorpusSchema {
    pub fn new<S: Into<String>>(name: impl Into<String>, labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let adu_labels: BTreeSet<String> = labels.into_iter().map(Into::into).collect();
        if adu_labels.is_empty() {
            return Err(Error::InvalidInput(
                "a corpus schema needs at least one ADU label".into(),
            ));
        }
        Ok(CorpusSchema {
            name: name.into(),
            adu_labels,
        })
    }

    pub fn pec() -> Self {
        Self::new("pec", ["Premise", "Claim", "MajorClaim"]).unwrap()
    }

    pub fn mtx() -> Self {
        Self::new("mtx", ["Premise", "Claim"]).unwrap()
    }

    pub fn hotel() -> Self {
        Self::new(
            "hotel",
            [
                "Background",
                "Claim",
                "ImplicitPremise",
                "MajorClaim",
                "Premise",
                "Recommendation",
            ],
        )
        .unwrap()
    }

    /// Labels used by the synthetic dataset.
    pub fn artificial() -> Self {
        Self::new("artificial", ["Claim", "Support", "Attack"]).unwrap()
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "pec" => Some(Self::pec()),
            "mtx" => Some(Self::mtx()),
            "hotel" => Some(Self::hotel()),
            "artificial" => Some(Self::artificial()),
            _ => None,
        }
    }

    pub fn contains(&self, label: &str) -> bool {
        self.adu_labels.contains(label)
    }

    /// Rejects spans whose label is outside the schema.
    pub fn check_spans(&self, spans: &[AduSpan]) -> Result<()> {
        match spans.iter().find(|s| !self.contains(&s.label)) {
            Some(s) => Err(Error::InvalidInput(format!(
                "label {:?} is not part of the {} schema",
                s.label, self.name
            ))),
            None => Ok(()),
        }
    }
}

/// The DM preceding one ADU; empty text means implicit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DmSlot {
    pub adu_index: usize,
    pub text: String,
}

impl DmSlot {
    pub fn new(adu_index: usize, text: impl Into<String>) -> Self {
        DmSlot {
            adu_index,
            text: text.into(),
        }
    }

    pub fn is_explicit(&self) -> bool {
        !self.text.trim().is_empty()
    }
}

/// Slot texts, in ADU order.
pub fn slot_texts(slots: &[DmSlot]) -> Vec<&str> {
    slots.iter().map(|s| s.text.as_str()).collect()
}
