//! Gold-DM extraction heuristics, explicit-DM removal with grammatical
//! repair, and recovery of predicted DMs from a model's rewritten text.

use std::collections::BTreeSet;
use std::io::BufRead;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::bio::{validate_spans, AduSpan, DmSlot};
use crate::diff::{opcodes, OpCode};
use crate::error::{Error, Result};
use crate::text::{capitalize_first, detokenize, is_punctuation, sentence_starts, tokenize, TokenSequence};

/// Default radius (in tokens) of the window around a candidate position in
/// which an inserted block is attributed to that candidate.
pub const CANDIDATE_WINDOW: usize = 3;

/// Punctuation that makes a comma substitution unnecessary when it directly
/// precedes a removed DM.
pub const REPAIR_PUNCTUATION: &[&str] = &[",", ";", ":", "—", "(", "\""];

/// Set of DMs matched case-insensitively with longest-match semantics.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DmLexicon {
    entries: BTreeSet<String>,
    token_entries: Vec<Vec<String>>,
}

impl DmLexicon {
    pub fn new<S: AsRef<str>>(entries: impl IntoIterator<Item = S>) -> Self {
        let entries: BTreeSet<String> = entries
            .into_iter()
            .map(|e| e.as_ref().trim().to_lowercase())
            .filter(|e| !e.is_empty())
            .collect();
        let mut token_entries: Vec<Vec<String>> = entries
            .iter()
            .map(|e| tokenize(e).into_inner())
            .filter(|t| !t.is_empty())
            .collect();
        token_entries.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        DmLexicon { entries, token_entries }
    }

    /// One entry per line; `#` starts a comment line.
    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut entries = Vec::new();
        for line in reader.lines() {
            let line = line?;
            let t = line.trim();
            if !t.is_empty() && !t.starts_with('#') {
                entries.push(t.to_string());
            }
        }
        Ok(Self::new(entries))
    }

    pub fn bundled() -> Self {
        Self::read(crate::data::DM_LEXICON.as_bytes()).expect("bundled lexicon")
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, dm: &str) -> bool {
        self.entries.contains(&crate::text::dm_key(dm))
    }

    /// Number of tokens of the longest entry that `tokens` starts with.
    pub fn longest_prefix<S: AsRef<str>>(&self, tokens: &[S]) -> Option<usize> {
        self.token_entries
            .iter()
            .find(|entry| {
                entry.len() <= tokens.len()
                    && entry
                        .iter()
                        .zip(tokens)
                        .all(|(e, t)| e.eq_ignore_ascii_case(t.as_ref()) || *e == t.as_ref().to_lowercase())
            })
            .map(Vec::len)
    }
}

/// A paragraph with its ADUs and sentence boundaries.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedParagraph {
    pub tokens: TokenSequence,
    pub adus: Vec<AduSpan>,
    /// Sentence start indices; the first is 0.
    pub sentence_bounds: Vec<usize>,
}

impl AnnotatedParagraph {
    /// Sorts and validates the ADUs and splits sentences at terminal
    /// punctuation.
    pub fn new(tokens: TokenSequence, adus: Vec<AduSpan>) -> Result<Self> {
        let sentence_bounds = sentence_starts(&tokens);
        Self::with_sentence_bounds(tokens, adus, sentence_bounds)
    }

    pub fn with_sentence_bounds(
        tokens: TokenSequence,
        adus: Vec<AduSpan>,
        sentence_bounds: Vec<usize>,
    ) -> Result<Self> {
        let adus = validate_spans(&adus, tokens.len())?;
        let ok = if tokens.is_empty() {
            sentence_bounds.is_empty()
        } else {
            sentence_bounds.first() == Some(&0)
                && sentence_bounds.windows(2).all(|w| w[0] < w[1])
                && sentence_bounds.last().is_some_and(|&s| s < tokens.len())
        };
        if !ok {
            return Err(Error::InvalidInput(
                "sentence bounds must partition the token range".into(),
            ));
        }
        Ok(AnnotatedParagraph {
            tokens,
            adus,
            sentence_bounds,
        })
    }

    /// Builds a paragraph from text with ADUs marked as `[label:text]`,
    /// mostly for tests and examples: `"[Claim:it rains], [Premise:I stay]."`.
    pub fn from_bracketed(marked: &str) -> Result<Self> {
        let mut plain = String::new();
        let mut adus: Vec<(usize, usize, String)> = Vec::new();
        let mut rest = marked;
        while let Some(open) = rest.find('[') {
            let close = rest[open..]
                .find(']')
                .map(|c| open + c)
                .ok_or_else(|| Error::InvalidInput("unclosed '['".into()))?;
            plain.push_str(&rest[..open]);
            let inner = &rest[open + 1..close];
            let (label, body) = inner
                .split_once(':')
                .ok_or_else(|| Error::InvalidInput(format!("ADU {inner:?} lacks a label")))?;
            let before = tokenize(&plain).len();
            plain.push_str(body);
            adus.push((before, 0, label.trim().to_string()));
            let after = tokenize(&plain).len();
            adus.last_mut().unwrap().1 = after;
            rest = &rest[close + 1..];
        }
        plain.push_str(rest);
        let tokens = tokenize(&plain);
        let spans = adus.into_iter().map(|(s, e, l)| AduSpan::new(s, e, l)).collect();
        Self::new(tokens, spans)
    }

    pub fn sentence_start_of(&self, index: usize) -> usize {
        self.sentence_bounds
            .iter()
            .rev()
            .find(|&&s| s <= index)
            .copied()
            .unwrap_or(0)
    }

    /// The gap a DM for ADU `i` may occupy: from the later of its sentence
    /// start and the previous ADU's end, up to the ADU start.
    pub fn left_gap(&self, i: usize) -> Range<usize> {
        let adu = &self.adus[i];
        let prev_end = if i > 0 { self.adus[i - 1].end } else { 0 };
        let from = self.sentence_start_of(adu.start).max(prev_end).min(adu.start);
        from..adu.start
    }

    /// True when only punctuation separates `index` from its sentence start.
    pub fn is_sentence_initial(&self, index: usize) -> bool {
        let start = self.sentence_start_of(index);
        self.tokens[start..index].iter().all(|t| is_punctuation(t))
    }

    pub fn text(&self) -> String {
        detokenize(&self.tokens)
    }
}

/// `range` with punctuation-only tokens trimmed from both edges.
fn trim_punctuation<S: AsRef<str>>(tokens: &[S], range: Range<usize>) -> Range<usize> {
    let mut r = range;
    while r.start < r.end && is_punctuation(tokens[r.start].as_ref()) {
        r.start += 1;
    }
    while r.end > r.start && is_punctuation(tokens[r.end - 1].as_ref()) {
        r.end -= 1;
    }
    r
}

/// Token ranges of the left-context DMs, `None` where the gap holds nothing
/// but punctuation.
pub fn left_context_dm_ranges(p: &AnnotatedParagraph) -> Vec<Option<Range<usize>>> {
    (0..p.adus.len())
        .map(|i| {
            let r = trim_punctuation(&p.tokens, p.left_gap(i));
            (!r.is_empty()).then_some(r)
        })
        .collect()
}

/// Gold DMs as the text left of each ADU, back to the sentence start or the
/// previous ADU.
pub fn gold_dms_left_context(p: &AnnotatedParagraph) -> Vec<DmSlot> {
    left_context_dm_ranges(p)
        .into_iter()
        .enumerate()
        .map(|(i, r)| DmSlot::new(i, r.map(|r| detokenize(&p.tokens[r])).unwrap_or_default()))
        .collect()
}

/// Gold DMs as lexicon entries that open an ADU. Matched prefixes (and any
/// punctuation right after them) move out of the ADU.
pub fn gold_dms_prefix_split(p: &AnnotatedParagraph, lex: &DmLexicon) -> Result<(Vec<AduSpan>, Vec<DmSlot>)> {
    if lex.is_empty() {
        return Err(Error::InvalidInput("DM lexicon is empty".into()));
    }
    let mut adus = Vec::with_capacity(p.adus.len());
    let mut slots = Vec::with_capacity(p.adus.len());
    for (i, adu) in p.adus.iter().enumerate() {
        let toks = &p.tokens[adu.range()];
        match lex.longest_prefix(toks) {
            Some(n) => {
                let dm = detokenize(&toks[..n]);
                let mut start = adu.start + n;
                while start < adu.end && is_punctuation(&p.tokens[start]) {
                    start += 1;
                }
                if start >= adu.end {
                    return Err(Error::EmptyAdu { index: i, dm });
                }
                adus.push(AduSpan::new(start, adu.end, adu.label.clone()));
                slots.push(DmSlot::new(i, dm));
            }
            None => {
                adus.push(adu.clone());
                slots.push(DmSlot::new(i, ""));
            }
        }
    }
    Ok((adus, slots))
}

/// Text-level variant of the prefix split for a single ADU.
pub fn split_dm_prefix(adu_text: &str, lex: &DmLexicon) -> (String, String) {
    let toks = tokenize(adu_text);
    match lex.longest_prefix(&toks) {
        Some(n) => {
            let mut rest = n;
            while rest < toks.len() && is_punctuation(&toks[rest]) {
                rest += 1;
            }
            (detokenize(&toks[..n]), detokenize(&toks[rest..]))
        }
        None => (String::new(), adu_text.to_string()),
    }
}

/// Finds the tokens of `dm` inside `gap`, preferring the occurrence closest
/// to the gap end.
fn locate_dm(tokens: &[String], gap: Range<usize>, dm: &str) -> Option<Range<usize>> {
    let needle = tokenize(dm);
    if needle.is_empty() || needle.len() > gap.len() {
        return None;
    }
    (gap.start..=gap.end - needle.len()).rev().find_map(|s| {
        let hit = needle
            .iter()
            .zip(&tokens[s..s + needle.len()])
            .all(|(a, b)| a.to_lowercase() == b.to_lowercase());
        hit.then_some(s..s + needle.len())
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Edit {
    Keep,
    Drop,
    /// Drop the token and put a comma in its place.
    Comma,
}

/// Deletes every explicit DM named in `slots` and repairs the sentence: a
/// mid-sentence DM not already preceded by punctuation becomes a comma, and
/// after a sentence-initial DM the following word is uppercased.
pub fn remove_explicit_dms(p: &AnnotatedParagraph, slots: &[DmSlot]) -> Result<(TokenSequence, Vec<AduSpan>)> {
    if slots.len() != p.adus.len() {
        return Err(Error::LengthMismatch {
            what: "DM slots vs ADUs",
            left: slots.len(),
            right: p.adus.len(),
        });
    }
    let n = p.tokens.len();
    let mut edits = vec![Edit::Keep; n];
    let mut capitalize = vec![false; n];

    for (i, slot) in slots.iter().enumerate() {
        if !slot.is_explicit() {
            continue;
        }
        let gap = p.left_gap(i);
        let dm = locate_dm(&p.tokens, gap.clone(), &slot.text)
            .ok_or_else(|| Error::InvalidInput(format!("DM {:?} not found before ADU {i}", slot.text)))?;
        let follows_comma = dm.end < n && p.tokens[dm.end] == ",";

        if p.is_sentence_initial(dm.start) {
            edits[dm.clone()].fill(Edit::Drop);
            if follows_comma && dm.end < p.adus[i].start {
                edits[dm.end] = Edit::Drop;
            }
            capitalize[p.adus[i].start] = true;
        } else {
            let prev = &p.tokens[dm.start - 1];
            let preceded = REPAIR_PUNCTUATION.contains(&prev.as_str()) && edits[dm.start - 1] == Edit::Keep;
            edits[dm.clone()].fill(Edit::Drop);
            if preceded {
                if follows_comma && dm.end < p.adus[i].start {
                    edits[dm.end] = Edit::Drop;
                }
            } else if !follows_comma {
                edits[dm.start] = Edit::Comma;
            }
        }
    }

    let mut out = Vec::with_capacity(n);
    let mut new_index = vec![0usize; n + 1];
    for (i, tok) in p.tokens.iter().enumerate() {
        match edits[i] {
            Edit::Keep => {}
            Edit::Drop => {
                new_index[i] = out.len();
                continue;
            }
            Edit::Comma => {
                out.push(",".to_string());
                new_index[i] = out.len();
                continue;
            }
        }
        new_index[i] = out.len();
        out.push(if capitalize[i] {
            capitalize_first(tok)
        } else {
            tok.clone()
        });
    }
    new_index[n] = out.len();

    let adus = p
        .adus
        .iter()
        .map(|a| AduSpan::new(new_index[a.start], new_index[a.start] + a.len(), a.label.clone()))
        .collect();
    Ok((TokenSequence::from_vec_unchecked(out), adus))
}

/// Recovers the DM inserted before each candidate position by diffing the
/// model input against its output.
pub fn diff_predicted_dms(input: &[String], output: &[String], candidates: &[usize]) -> Vec<DmSlot> {
    diff_predicted_dms_with_window(input, output, candidates, CANDIDATE_WINDOW)
}

pub fn diff_predicted_dms_with_window(
    input: &[String],
    output: &[String],
    candidates: &[usize],
    window: usize,
) -> Vec<DmSlot> {
    // (distance, output range) per candidate, keeping only the closest blocks
    let mut assigned: Vec<Option<(usize, Vec<Range<usize>>)>> = vec![None; candidates.len()];

    for op in opcodes(input, output) {
        let (a, b) = match &op {
            OpCode::Insert(a, b) | OpCode::Replace(a, b) => (a.clone(), b.clone()),
            _ => continue,
        };
        let b = trim_punctuation(output, b);
        if b.is_empty() {
            continue;
        }
        let best = candidates
            .iter()
            .enumerate()
            .map(|(k, &c)| {
                let d = if c < a.start {
                    a.start - c
                } else if c > a.end {
                    c - a.end
                } else {
                    0
                };
                (d, k)
            })
            .filter(|&(d, _)| d <= window)
            .min_by(|x, y| x.0.cmp(&y.0).then(y.1.cmp(&x.1)));
        if let Some((d, k)) = best {
            match &mut assigned[k] {
                Some((best_d, ranges)) if *best_d == d => ranges.push(b),
                Some((best_d, _)) if *best_d < d => {}
                slot => *slot = Some((d, vec![b])),
            }
        }
    }

    assigned
        .into_iter()
        .enumerate()
        .map(|(k, a)| {
            let text = a
                .map(|(_, ranges)| {
                    let toks: Vec<&str> = ranges
                        .into_iter()
                        .flat_map(|r| output[r].iter().map(String::as_str))
                        .collect();
                    detokenize(&toks)
                })
                .unwrap_or_default();
            DmSlot::new(k, text)
        })
        .collect()
}
