//! Sequence-labeling metrics: exact-match span F1 and token-level scores.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::bio::{bio_to_spans, AduSpan, BioMode, Tag};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpanScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub true_positives: usize,
    pub predicted: usize,
    pub gold: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TokenScores {
    pub accuracy: f64,
    pub macro_f1: f64,
}

fn check_lengths<G: AsRef<[Tag]>, P: AsRef<[Tag]>>(gold: &[G], pred: &[P]) -> Result<()> {
    if gold.len() != pred.len() {
        return Err(Error::LengthMismatch {
            what: "gold vs predicted sequences",
            left: gold.len(),
            right: pred.len(),
        });
    }
    for (g, p) in gold.iter().zip(pred) {
        if g.as_ref().len() != p.as_ref().len() {
            return Err(Error::LengthMismatch {
                what: "gold vs predicted labels",
                left: g.as_ref().len(),
                right: p.as_ref().len(),
            });
        }
    }
    Ok(())
}

fn spans(tags: &[Tag]) -> BTreeSet<AduSpan> {
    bio_to_spans(tags, BioMode::Tolerant)
        .expect("tolerant decoding accepts any tag sequence")
        .into_iter()
        .collect()
}

fn ratio(num: usize, den: usize, empty: f64) -> f64 {
    if den == 0 {
        empty
    } else {
        num as f64 / den as f64
    }
}

/// Micro-averaged span precision, recall and F1; a span counts only when
/// start, end and label all match. With no spans on either side every score
/// is 1.
pub fn span_f1<G: AsRef<[Tag]>, P: AsRef<[Tag]>>(gold: &[G], pred: &[P]) -> Result<SpanScores> {
    check_lengths(gold, pred)?;
    let (mut tp, mut n_pred, mut n_gold) = (0, 0, 0);
    for (g, p) in gold.iter().zip(pred) {
        let gs = spans(g.as_ref());
        let ps = spans(p.as_ref());
        tp += gs.intersection(&ps).count();
        n_pred += ps.len();
        n_gold += gs.len();
    }
    let both_empty = if n_pred == 0 && n_gold == 0 { 1.0 } else { 0.0 };
    let precision = ratio(tp, n_pred, both_empty);
    let recall = ratio(tp, n_gold, both_empty);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(SpanScores {
        precision,
        recall,
        f1,
        true_positives: tp,
        predicted: n_pred,
        gold: n_gold,
    })
}

/// Flat token accuracy and macro-F1 over every tag seen in gold or
/// prediction, `O` included.
pub fn token_metrics<G: AsRef<[Tag]>, P: AsRef<[Tag]>>(gold: &[G], pred: &[P]) -> Result<TokenScores> {
    check_lengths(gold, pred)?;
    // (tp, fp, fn) per tag
    let mut counts: BTreeMap<&Tag, (usize, usize, usize)> = BTreeMap::new();
    let (mut correct, mut total) = (0, 0);
    for (g, p) in gold.iter().zip(pred) {
        for (g, p) in g.as_ref().iter().zip(p.as_ref()) {
            total += 1;
            if g == p {
                correct += 1;
                counts.entry(g).or_default().0 += 1;
            } else {
                counts.entry(p).or_default().1 += 1;
                counts.entry(g).or_default().2 += 1;
            }
        }
    }
    let macro_f1 = if counts.is_empty() {
        1.0
    } else {
        counts
            .values()
            .map(|&(tp, fp, fn_)| ratio(2 * tp, 2 * tp + fp + fn_, 0.0))
            .sum::<f64>()
            / counts.len() as f64
    };
    Ok(TokenScores {
        accuracy: ratio(correct, total, 1.0),
        macro_f1,
    })
}
